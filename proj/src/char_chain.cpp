#include "charflow/char_chain.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "charflow/errors.hpp"

namespace charflow {

const char* to_string(VerdictTag tag) {
  switch (tag) {
    case VerdictTag::Precompact: return "precompact";
    case VerdictTag::NotPrecompact: return "not_precompact";
    case VerdictTag::Unknown: return "unknown";
  }
  return "unknown";
}

const char* to_string(Tristate t) {
  switch (t) {
    case Tristate::True: return "true";
    case Tristate::False: return "false";
    case Tristate::Unknown: return "unknown";
  }
  return "unknown";
}

Ideal degeneration_ideal(const FieldSystem& sys, std::size_t s, const ChainOptions& options) {
  const auto basis = bracket_basis(sys, s);
  if (basis.size() > options.max_columns)
    throw BudgetExhausted("bracket basis has " + std::to_string(basis.size()) + " columns, cap is " +
                          std::to_string(options.max_columns));
  std::vector<std::vector<Poly>> columns;
  columns.reserve(basis.size());
  for (const auto& e : basis) columns.push_back(e.field.coeffs());
  return minors_ideal(columns, sys.dimension(), options.max_minors);
}

Ideal char_step(const Ideal& ideal, const FieldSystem& sys) {
  if (ideal.nvars() != sys.dimension()) throw DimensionMismatch("char_step: ideal and fields in different dimensions");
  const auto& G = ideal.basis();
  std::vector<Poly> gens = G;
  for (const auto& g : G)
    for (const auto& X : sys.fields()) {
      Poly d = apply_field(X, g);
      if (!d.is_zero() && std::find(gens.begin(), gens.end(), d) == gens.end()) gens.push_back(std::move(d));
    }
  return Ideal(ideal.nvars(), std::move(gens), ideal.order());
}

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

struct JacobianInfo {
  std::size_t rank = 0;
  Eigen::MatrixXd row_space;  // n x rank, orthonormal columns
};

JacobianInfo jacobian_info(const std::vector<NumericPoly>& gens, std::span<const double> p, double rank_gap) {
  const std::size_t n = p.size();
  Eigen::MatrixXd J(static_cast<Eigen::Index>(gens.size()), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < gens.size(); ++i)
    for (std::size_t k = 0; k < n; ++k) J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = gens[i].partial(k, p);
  JacobianInfo info;
  if (J.rows() == 0) return info;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) < 1e-12) return info;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > sv(0) / rank_gap) ++info.rank;
  info.row_space = svd.matrixV().leftCols(static_cast<Eigen::Index>(info.rank));
  return info;
}

ChainStep make_step(std::size_t k, Ideal ideal, const SearchBox& box, const ChainOptions& options) {
  ChainStep step{k, std::move(ideal), {}, 0, {}};
  step.generator_count = step.ideal.generators().size();
  step.status = real_emptiness_status(step.ideal, box, options.groebner);
  if (step.status.has_witness())
    step.samples = sample_variety(step.ideal.nvars(), step.ideal.best_generators(), box, options.samples_per_step);
  return step;
}

bool samples_lie_on(const ChainStep& from, const ChainStep& onto, double tol) {
  for (const auto& p : from.samples) {
    const double move = 1e-5 * (1.0 + norm(p));
    if (!polish_onto(onto.ideal.nvars(), onto.ideal.best_generators(), p, tol, move)) return false;
  }
  return true;
}

/// Set-level equality V(a) == V(b): identical reduced bases, or mutual
/// sampling containment when both varieties have real samples.
bool same_variety(const ChainStep& a, const ChainStep& b, const SearchBox& box) {
  if (a.ideal.has_basis() && b.ideal.has_basis() && a.ideal.basis() == b.ideal.basis()) return true;
  if (a.samples.empty() || b.samples.empty()) return false;
  return samples_lie_on(a, b, box.tol_witness) && samples_lie_on(b, a, box.tol_witness);
}

}  // namespace

ChainReport run_chain(const FieldSystem& sys, std::size_t s, const SearchBox& box, const ChainOptions& options) {
  box.validate();
  if (s == 0) throw PreconditionError("bracket length bound s must be >= 1");
  const std::size_t n = sys.dimension();
  ChainReport rep;
  rep.s = s;
  rep.dimension = n;

  std::optional<Ideal> current;
  try {
    current = groebner(degeneration_ideal(sys, s, options), options.groebner);
  } catch (const BudgetExhausted& e) {
    rep.budget_exhausted = true;
    rep.warnings.push_back(std::string("degeneration ideal: ") + e.what());
    rep.verdict = verdict(rep, std::nullopt);
    return rep;
  }
  if (current->is_zero_ideal())
    rep.warnings.push_back("degeneration ideal is zero: Z^(s) is the whole chart (nonempty interior)");

  for (std::size_t k = 0; k <= n + 1; ++k) {
    rep.steps.push_back(make_step(k, *current, box, options));
    const ChainStep& step = rep.steps.back();
    if (!step.status.note.empty()) rep.warnings.push_back("step " + std::to_string(k) + ": " + step.status.note);
    if (step.status.empty_certified()) break;
    if (k >= 1 && same_variety(rep.steps[k - 1], step, box)) {
      rep.stabilized_at = k - 1;
      break;
    }
    if (k == n + 1) break;
    try {
      current = groebner(char_step(*current, sys), options.groebner);
    } catch (const BudgetExhausted& e) {
      rep.budget_exhausted = true;
      rep.warnings.push_back("char step " + std::to_string(k + 1) + ": " + e.what());
      break;
    }
  }
  rep.verdict = verdict(rep, std::nullopt);
  return rep;
}

std::optional<SubmanifoldWitness> verify_witness(const Ideal& ideal, const FieldSystem& sys, const SearchBox& box,
                                                 const ChainOptions& options) {
  if (ideal.nvars() != sys.dimension()) throw DimensionMismatch("verify_witness: dimension mismatch");
  const Ideal I = groebner(ideal, options.groebner);
  const auto& G = I.basis();
  if (G.empty()) return std::nullopt;
  if (G.size() == 1 && G.front().is_constant()) return std::nullopt;

  bool certified = true;
  for (const auto& g : G)
    for (const auto& X : sys.fields())
      if (!is_member(apply_field(X, g), I)) certified = false;

  std::vector<NumericPoly> gens(G.begin(), G.end());
  const std::size_t n = sys.dimension();
  std::optional<SubmanifoldWitness> uncertified;
  for (const auto& p : sample_variety(n, G, box, 8)) {
    const JacobianInfo info = jacobian_info(gens, p, options.rank_gap);
    if (info.rank == 0) continue;

    bool constant_rank = true;
    const double delta = 1e-5 * (1.0 + norm(p));
    for (std::size_t i = 0; i < n && constant_rank; ++i)
      for (double sign : {-1.0, 1.0}) {
        std::vector<double> q = p;
        q[i] += sign * delta;
        if (jacobian_info(gens, q, options.rank_gap).rank != info.rank) constant_rank = false;
      }
    if (!constant_rank) continue;

    bool tangent = true;
    for (const auto& X : sys.fields()) {
      const std::vector<double> v = X.evaluate(p);
      const Eigen::Map<const Eigen::VectorXd> vv(v.data(), static_cast<Eigen::Index>(v.size()));
      const double vn = vv.norm();
      if (vn == 0.0) continue;
      if ((info.row_space.transpose() * vv).norm() > options.tol_tangent * vn) tangent = false;
    }
    if (!tangent) continue;

    SubmanifoldWitness w{I, p, info.rank, certified};
    if (certified) return w;
    if (!uncertified) uncertified = std::move(w);
  }
  return uncertified;
}

Verdict verdict(const ChainReport& report, const std::optional<SubmanifoldWitness>& witness) {
  Verdict v;
  for (const auto& step : report.steps) {
    if (step.status.empty_certified() && step.k <= report.dimension + 1) {
      v.tag = VerdictTag::Precompact;
      v.certified_step = step.k;
      v.reason = "iterated characteristic ideal at step " + std::to_string(step.k) +
                 " contains 1, so Z^(s)_" + std::to_string(step.k) + " is empty";
      return v;
    }
  }
  if (witness && witness->tangency_certified && witness->jacobian_rank >= 1) {
    v.tag = VerdictTag::NotPrecompact;
    v.witness = witness;
    v.reason = "characteristic submanifold of codimension " + std::to_string(witness->jacobian_rank) +
               " verified (exact tangency, locally constant Jacobian rank)";
    return v;
  }
  v.tag = VerdictTag::Unknown;
  if (report.budget_exhausted) {
    v.reason = "computation budget exhausted";
  } else if (witness && !witness->tangency_certified) {
    v.reason = "uncertified witness: numeric tangency holds but exact membership fails";
  } else if (!report.steps.empty() && report.steps.front().ideal.is_zero_ideal()) {
    v.reason = "degeneration locus has nonempty interior at this s";
  } else if (!report.steps.empty() &&
             std::all_of(report.steps.begin(), report.steps.end(),
                         [](const ChainStep& st) { return st.status.tag == EmptinessTag::Unknown; })) {
    v.reason = "real emptiness undecided";
  } else if (report.stabilized_at) {
    v.reason = "chain stabilized at a nonempty set but no characteristic submanifold was verified";
  } else {
    v.reason = "chain did not stabilize within n+2 steps";
  }
  return v;
}

namespace {

/// Nearest rational with a small denominator, accepted only when it
/// reproduces the point to 1e-7.
std::optional<std::vector<Rational>> small_rational_point(std::span<const double> p) {
  for (long d = 1; d <= 64; ++d) {
    std::vector<Rational> q;
    bool ok = true;
    for (double x : p) {
      const double num = std::round(x * static_cast<double>(d));
      if (std::abs(num / static_cast<double>(d) - x) > 1e-7) {
        ok = false;
        break;
      }
      Rational r(static_cast<long>(num), d);
      r.canonicalize();
      q.push_back(r);
    }
    if (ok) return q;
  }
  return std::nullopt;
}

}  // namespace

Analysis analyze(const FieldSystem& sys, std::size_t s, const SearchBox& box, const ChainOptions& options) {
  Analysis out;
  out.report = run_chain(sys, s, box, options);
  ChainReport& rep = out.report;
  if (rep.verdict.tag == VerdictTag::Precompact || rep.steps.empty()) return out;

  const std::size_t n = sys.dimension();
  const Ideal& last = rep.steps.back().ideal;

  try {
    if (auto w = verify_witness(last, sys, box, options)) {
      out.witness = std::move(w);
      out.witness_source = "final chain ideal";
    }
    if (!out.witness || !out.witness->tangency_certified) {
      // Points where every field vanishes are 0-dimensional characteristic
      // submanifolds; look for rational ones on the final chain variety.
      std::vector<Poly> gens = last.best_generators();
      for (const auto& X : sys.fields())
        for (const auto& c : X.coeffs())
          if (!c.is_zero()) gens.push_back(c);
      for (const auto& p : sample_variety(n, gens, box, 4)) {
        auto q = small_rational_point(p);
        if (!q) continue;
        bool vanishes = true;
        for (const auto& g : gens)
          if (g.evaluate(std::span<const Rational>(*q)) != 0) vanishes = false;
        if (!vanishes) continue;
        std::vector<Poly> lin;
        for (std::size_t i = 0; i < n; ++i) lin.push_back(Poly::variable(n, i) - Poly::constant(n, (*q)[i]));
        if (auto w = verify_witness(Ideal(n, std::move(lin)), sys, box, options); w && w->tangency_certified) {
          out.witness = std::move(w);
          std::ostringstream os;
          os << "common zero of all fields at (";
          for (std::size_t i = 0; i < n; ++i) os << (i ? ", " : "") << (*q)[i].get_str();
          os << ")";
          out.witness_source = os.str();
          break;
        }
      }
    }
  } catch (const BudgetExhausted& e) {
    rep.warnings.push_back(std::string("witness search: ") + e.what());
  }
  rep.verdict = verdict(rep, out.witness);
  return out;
}

AmanoResult amano_check(const FieldSystem& sys, const Poly& phi, const std::vector<PolyVectorField>& ys,
                        std::size_t s, const SearchBox& box, const ChainOptions& options) {
  if (ys.empty()) throw PreconditionError("amano_check: the list of fields Y_1..Y_N must be nonempty");
  const std::size_t n = sys.dimension();
  if (phi.nvars() != n) throw DimensionMismatch("amano_check: Phi lives in a different ring");

  AmanoResult res;
  res.derivatives.push_back(phi);
  for (const auto& Y : ys) res.derivatives.push_back(apply_field(Y, res.derivatives.back()));

  const Ideal deg = groebner(degeneration_ideal(sys, s, options), options.groebner);
  std::vector<Poly> gens = deg.basis();
  gens.insert(gens.end(), res.derivatives.begin(), res.derivatives.end());
  res.status = real_emptiness_status(Ideal(n, std::move(gens)), box, options.groebner);
  res.holds = res.status.empty_certified() ? Tristate::True
              : res.status.has_witness()   ? Tristate::False
                                           : Tristate::Unknown;

  res.chain = run_chain(sys, s, box, options);
  for (const auto& step : res.chain.steps) {
    if (step.k == 0) continue;
    for (const auto& p : step.samples) {
      ++res.inclusion_checked;
      for (std::size_t i = 1; i <= std::min(step.k, ys.size()); ++i)
        if (std::abs(res.derivatives[i].evaluate(std::span<const double>(p))) > 1e-6) {
          ++res.inclusion_violations;
          break;
        }
    }
  }

  std::ostringstream os;
  os << "Amano cover condition " << (res.holds == Tristate::True    ? "holds"
                                     : res.holds == Tristate::False ? "fails"
                                                                    : "is undecided")
     << " with N=" << ys.size() << "; chain ";
  if (res.chain.verdict.certified_step)
    os << "certifies emptiness at step " << *res.chain.verdict.certified_step;
  else if (res.chain.stabilized_at)
    os << "stabilizes nonempty at step " << *res.chain.stabilized_at;
  else
    os << "is inconclusive";
  os << "; inclusion Z_k in {Y_i...Y_1 Phi = 0, i <= k} checked at " << res.inclusion_checked << " chain points, "
     << res.inclusion_violations << " violations";
  res.comparison = os.str();
  return res;
}

}  // namespace charflow
