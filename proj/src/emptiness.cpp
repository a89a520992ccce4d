#include "charflow/emptiness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "charflow/errors.hpp"

namespace charflow {

void SearchBox::validate() const {
  if (radius <= 0) throw PreconditionError("search box radius must be positive");
  if (grid_per_axis < 2) throw PreconditionError("search box needs at least 2 grid points per axis");
  if (!(tol_witness > 0)) throw PreconditionError("tol_witness must be positive");
}

const char* to_string(EmptinessTag tag) {
  switch (tag) {
    case EmptinessTag::EmptyCertified: return "empty_certified";
    case EmptinessTag::NonEmptyWitness: return "nonempty_witness";
    case EmptinessTag::Unknown: return "unknown";
  }
  return "unknown";
}

SumOfSquares::SumOfSquares(std::size_t nvars, std::span<const Poly> generators) : nvars_(nvars) {
  for (const auto& g : generators) {
    if (g.nvars() != nvars) throw DimensionMismatch("sum of squares over mixed rings");
    gens_.emplace_back(g);
  }
}

double SumOfSquares::value(std::span<const double> x) const {
  double f = 0.0;
  for (const auto& g : gens_) {
    const double v = g.value(x);
    f += v * v;
  }
  return f;
}

double SumOfSquares::max_abs(std::span<const double> x) const {
  double m = 0.0;
  for (const auto& g : gens_) m = std::max(m, std::abs(g.value(x)));
  return m;
}

std::vector<double> SumOfSquares::descend(std::vector<double> x, double target, std::size_t max_sweeps) const {
  double F = value(x);
  for (std::size_t sweep = 0; sweep < max_sweeps && F > target; ++sweep) {
    const double F_start = F;
    for (std::size_t i = 0; i < nvars_ && F > target; ++i) {
      double grad = 0.0, curv = 0.0;
      for (const auto& g : gens_) {
        const double v = g.value(x);
        const double d = g.partial(i, x);
        grad += 2.0 * v * d;
        curv += 2.0 * (d * d + v * g.second_partial(i, x));
      }
      if (grad == 0.0) continue;
      const double step = curv > 0.0 ? -grad / curv : -grad;
      const double xi = x[i];
      for (double t = 1.0; t > 1e-12; t *= 0.5) {
        x[i] = xi + t * step;
        const double trial = value(x);
        if (trial < F) {
          F = trial;
          break;
        }
        x[i] = xi;
      }
    }
    if (!(F < F_start * (1.0 - 1e-10))) break;
  }
  return x;
}

std::vector<double> SumOfSquares::refine(std::vector<double> x, double target, std::size_t max_iterations) const {
  const auto m = static_cast<Eigen::Index>(gens_.size());
  const auto n = static_cast<Eigen::Index>(nvars_);
  double F = value(x);
  double mu = 1e-3;
  Eigen::VectorXd r(m);
  Eigen::MatrixXd J(m, n);
  std::vector<double> trial(x.size());
  for (std::size_t it = 0; it < max_iterations && F > target; ++it) {
    for (Eigen::Index i = 0; i < m; ++i) {
      r(i) = gens_[static_cast<std::size_t>(i)].value(x);
      for (Eigen::Index k = 0; k < n; ++k) J(i, k) = gens_[static_cast<std::size_t>(i)].partial(static_cast<std::size_t>(k), x);
    }
    const Eigen::MatrixXd JtJ = J.transpose() * J;
    const Eigen::VectorXd g = J.transpose() * r;
    const double scale = std::max(JtJ.diagonal().maxCoeff(), 1e-300);
    bool improved = false;
    for (int attempt = 0; attempt < 30 && !improved; ++attempt) {
      Eigen::MatrixXd A = JtJ;
      A.diagonal().array() += mu * scale;
      const Eigen::VectorXd step = A.ldlt().solve(-g);
      for (std::size_t k = 0; k < x.size(); ++k) trial[k] = x[k] + step(static_cast<Eigen::Index>(k));
      const double Ft = value(trial);
      if (Ft < F) {
        x = trial;
        F = Ft;
        mu = std::max(mu / 3.0, 1e-12);
        improved = true;
      } else {
        mu *= 4.0;
      }
    }
    if (!improved) break;
  }
  return x;
}

namespace {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

constexpr double kMaxGridPoints = 250000.0;

}  // namespace

std::vector<std::vector<double>> sample_variety(std::size_t nvars, std::span<const Poly> generators,
                                                const SearchBox& box, std::size_t max_samples) {
  box.validate();
  const SumOfSquares F(nvars, generators);
  const double R = to_double(box.radius);

  std::size_t per_axis = box.grid_per_axis;
  while (per_axis > 2 && std::pow(static_cast<double>(per_axis), static_cast<double>(nvars)) > kMaxGridPoints)
    --per_axis;
  std::size_t total = 1;
  for (std::size_t i = 0; i < nvars; ++i) total *= per_axis;

  auto node = [&](std::size_t idx) {
    std::vector<double> p(nvars);
    for (std::size_t i = 0; i < nvars; ++i) {
      const std::size_t k = idx % per_axis;
      idx /= per_axis;
      p[i] = -R + 2.0 * R * static_cast<double>(k) / static_cast<double>(per_axis - 1);
    }
    return p;
  };

  std::vector<double> values(total);
  for (std::size_t idx = 0; idx < total; ++idx) values[idx] = F.value(node(idx));
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  const std::size_t seeds = std::min(total, std::max<std::size_t>(16, 4 * max_samples));
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(seeds), order.end(),
                    [&](std::size_t a, std::size_t b) { return values[a] < values[b] || (values[a] == values[b] && a < b); });

  struct Found {
    std::vector<double> p;
    double residual;
  };
  std::vector<Found> found;
  for (std::size_t s = 0; s < seeds; ++s) {
    std::vector<double> p = F.descend(node(order[s]), box.tol_witness * 1e-3);
    if (!(F.value(p) < box.tol_witness)) continue;
    // Accepted; keep descending. Near multiple roots F is very flat, so a point
    // under tol_witness can still sit far from the variety.
    p = F.refine(std::move(p), box.tol_witness * 1e-12);
    const double res = F.value(p);
    const bool dup = std::any_of(found.begin(), found.end(), [&](const Found& f) {
      return distance(f.p, p) < 1e-6 * (1.0 + R);
    });
    if (!dup) found.push_back({std::move(p), res});
  }
  std::stable_sort(found.begin(), found.end(), [](const Found& a, const Found& b) { return a.residual < b.residual; });

  // Farthest-point selection, starting from the best residual.
  std::vector<std::vector<double>> picked;
  std::vector<bool> used(found.size(), false);
  while (picked.size() < max_samples && picked.size() < found.size()) {
    std::size_t best = found.size();
    double best_d = -1.0;
    for (std::size_t i = 0; i < found.size(); ++i) {
      if (used[i]) continue;
      double d = picked.empty() ? 0.0 : std::numeric_limits<double>::infinity();
      for (const auto& q : picked) d = std::min(d, distance(found[i].p, q));
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    used[best] = true;
    picked.push_back(found[best].p);
  }
  return picked;
}

std::optional<std::vector<double>> polish_onto(std::size_t nvars, std::span<const Poly> generators,
                                               std::span<const double> start, double tol, double max_move) {
  const SumOfSquares F(nvars, generators);
  std::vector<double> p(start.begin(), start.end());
  p = F.descend(std::move(p), tol * 1e-3);
  if (F.value(p) < tol && distance(p, start) <= max_move) return p;
  return std::nullopt;
}

EmptinessStatus real_emptiness_status(const Ideal& ideal, const SearchBox& box, const GroebnerOptions& options) {
  box.validate();
  EmptinessStatus status;
  const Ideal* source = &ideal;
  std::optional<Ideal> computed;
  try {
    computed = groebner(ideal, options);
    source = &*computed;
    if (normal_form(Poly::constant(ideal.nvars(), 1), *computed).is_zero()) {
      status.tag = EmptinessTag::EmptyCertified;
      return status;
    }
  } catch (const BudgetExhausted& e) {
    status.note = e.what();
  }
  const auto& gens = source->best_generators();
  auto samples = sample_variety(ideal.nvars(), gens, box, 1);
  if (!samples.empty()) {
    status.tag = EmptinessTag::NonEmptyWitness;
    status.residual = SumOfSquares(ideal.nvars(), gens).value(samples.front());
    status.point = std::move(samples.front());
  }
  return status;
}

}  // namespace charflow
