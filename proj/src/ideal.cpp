#include "charflow/ideal.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "charflow/errors.hpp"

namespace charflow {

Ideal::Ideal(std::size_t nvars, std::vector<Poly> generators, MonomialOrder order) : nvars_(nvars), order_(order) {
  if (nvars == 0 || nvars > kMaxVars) throw DimensionMismatch("ideal ring dimension out of range");
  for (auto& g : generators) {
    if (g.nvars() != nvars) throw DimensionMismatch("ideal generator lives in a different ring");
    if (!g.is_zero()) generators_.push_back(std::move(g));
  }
}

Ideal Ideal::unit(std::size_t nvars, MonomialOrder order) {
  return Ideal(nvars, {Poly::constant(nvars, 1)}, order).with_basis({Poly::constant(nvars, 1)}, 0);
}

const std::vector<Poly>& Ideal::basis() const {
  if (!basis_) throw PreconditionError("Groebner basis has not been computed for this ideal");
  return *basis_;
}

Ideal Ideal::with_basis(std::vector<Poly> basis, std::size_t spair_reductions) const {
  Ideal copy = *this;
  copy.basis_ = std::move(basis);
  copy.spair_reductions_ = spair_reductions;
  return copy;
}

namespace {

struct Reducer {
  MonomialOrder order;
  std::size_t* steps = nullptr;
  std::size_t step_budget = 0;

  void tick() {
    if (steps && ++*steps > step_budget)
      throw BudgetExhausted("Groebner reduction-step budget of " + std::to_string(step_budget) + " exhausted");
  }

  Poly run(const Poly& f, std::span<const Poly> divisors) {
    const std::size_t n = f.nvars();
    std::vector<std::size_t> lead(divisors.size());
    for (std::size_t i = 0; i < divisors.size(); ++i) lead[i] = divisors[i].leading_index(order);

    std::vector<Term> remainder;
    Poly p = f;
    while (!p.is_zero()) {
      const Term lt = p.terms()[p.leading_index(order)];
      bool divided = false;
      for (std::size_t i = 0; i < divisors.size(); ++i) {
        const Term& gl = divisors[i].terms()[lead[i]];
        if (!gl.mono.divides(lt.mono)) continue;
        tick();
        p -= divisors[i].times_term(lt.mono / gl.mono, lt.coeff / gl.coeff);
        divided = true;
        break;
      }
      if (!divided) {
        remainder.push_back(lt);
        p -= Poly::monomial(n, lt.mono, lt.coeff);
      }
    }
    return Poly::from_terms(n, std::move(remainder));
  }
};

const Term& lead_term(const Poly& p, MonomialOrder order) { return p.terms()[p.leading_index(order)]; }

Poly s_polynomial(const Poly& f, const Poly& g, MonomialOrder order) {
  const Term& a = lead_term(f, order);
  const Term& b = lead_term(g, order);
  const Monomial l = a.mono.lcm(b.mono);
  return f.times_term(l / a.mono, Rational(1) / a.coeff) - g.times_term(l / b.mono, Rational(1) / b.coeff);
}

/// Minimalizes and tail-reduces a Groebner basis, producing the unique
/// reduced basis sorted by descending leading monomial.
std::vector<Poly> reduce_basis(std::vector<Poly> G, MonomialOrder order, Reducer& red) {
  // Drop elements whose leading monomial is divisible by another's; among
  // equal leading monomials keep the first.
  std::vector<Poly> minimal;
  for (std::size_t i = 0; i < G.size(); ++i) {
    const Monomial& mi = lead_term(G[i], order).mono;
    bool redundant = false;
    for (std::size_t j = 0; j < G.size() && !redundant; ++j) {
      if (i == j) continue;
      const Monomial& mj = lead_term(G[j], order).mono;
      if (mj.divides(mi) && (!(mj == mi) || j < i)) redundant = true;
    }
    if (!redundant) minimal.push_back(G[i]);
  }
  std::vector<Poly> reduced;
  reduced.reserve(minimal.size());
  for (std::size_t i = 0; i < minimal.size(); ++i) {
    std::vector<Poly> others;
    for (std::size_t j = 0; j < minimal.size(); ++j)
      if (j != i) others.push_back(j < i ? reduced[j] : minimal[j]);
    // Leading term is not divisible by any other leading term, so only the tail changes.
    reduced.push_back(red.run(minimal[i], others).monic(order));
  }
  std::sort(reduced.begin(), reduced.end(), [order](const Poly& a, const Poly& b) {
    return greater(order, lead_term(a, order).mono, lead_term(b, order).mono);
  });
  return reduced;
}

}  // namespace

Poly reduce(const Poly& f, std::span<const Poly> divisors, MonomialOrder order) {
  Reducer red{order};
  return red.run(f, divisors);
}

Ideal groebner(const Ideal& ideal, const GroebnerOptions& options) {
  if (ideal.has_basis()) return ideal;
  const MonomialOrder order = ideal.order();
  const std::size_t n = ideal.nvars();
  if (ideal.is_zero_ideal()) return ideal.with_basis({}, 0);

  std::vector<Poly> G;
  for (const auto& g : ideal.generators()) {
    if (g.is_constant()) return ideal.with_basis({Poly::constant(n, 1)}, 0);
    G.push_back(g.monic(order));
  }

  std::size_t steps = 0;
  Reducer red{order, &steps, options.step_budget};
  std::size_t reductions = 0;

  std::set<std::pair<std::size_t, std::size_t>> pending;
  for (std::size_t j = 0; j < G.size(); ++j)
    for (std::size_t i = 0; i < j; ++i) pending.insert({i, j});

  auto lm = [&](std::size_t i) -> const Monomial& { return lead_term(G[i], order).mono; };
  auto is_pending = [&](std::size_t a, std::size_t b) { return pending.count({std::min(a, b), std::max(a, b)}) > 0; };

  while (!pending.empty()) {
    // Normal strategy: smallest lcm first; ties broken by pair index.
    auto best = pending.begin();
    Monomial best_lcm = lm(best->first).lcm(lm(best->second));
    for (auto it = std::next(pending.begin()); it != pending.end(); ++it) {
      Monomial l = lm(it->first).lcm(lm(it->second));
      if (greater(order, best_lcm, l)) {
        best = it;
        best_lcm = l;
      }
    }
    const auto [i, j] = *best;
    pending.erase(best);

    if (lm(i).coprime(lm(j))) continue;
    bool chain = false;
    for (std::size_t k = 0; k < G.size() && !chain; ++k) {
      if (k == i || k == j) continue;
      if (lm(k).divides(best_lcm) && !is_pending(i, k) && !is_pending(j, k)) chain = true;
    }
    if (chain) continue;

    if (++reductions > options.spair_budget)
      throw BudgetExhausted("Groebner S-pair budget of " + std::to_string(options.spair_budget) + " exhausted");
    Poly h = red.run(s_polynomial(G[i], G[j], order), G);
    if (h.is_zero()) continue;
    if (h.is_constant()) return ideal.with_basis({Poly::constant(n, 1)}, reductions);
    G.push_back(h.monic(order));
    const std::size_t t = G.size() - 1;
    for (std::size_t a = 0; a < t; ++a) pending.insert({a, t});
  }

  return ideal.with_basis(reduce_basis(std::move(G), order, red), reductions);
}

Poly normal_form(const Poly& f, const Ideal& ideal) {
  if (f.nvars() != ideal.nvars()) throw DimensionMismatch("normal form of a polynomial from a different ring");
  return reduce(f, ideal.basis(), ideal.order());
}

bool is_member(const Poly& f, const Ideal& ideal) { return normal_form(f, ideal).is_zero(); }

bool contains_one(const Ideal& ideal, const GroebnerOptions& options) {
  const Ideal g = groebner(ideal, options);
  return normal_form(Poly::constant(g.nvars(), 1), g).is_zero();
}

Poly determinant(const std::vector<std::vector<Poly>>& columns) {
  const std::size_t n = columns.size();
  if (n == 0) throw PreconditionError("determinant of an empty matrix");
  if (n > 16) throw PreconditionError("determinant size too large");
  for (const auto& c : columns)
    if (c.size() != n) throw DimensionMismatch("determinant of a non-square matrix");
  const std::size_t nv = columns[0][0].nvars();

  // Laplace expansion along rows, memoized over the set of used columns:
  // minor[S] is the determinant of rows 0..|S|-1 restricted to columns S.
  std::unordered_map<std::uint32_t, Poly> minor;
  minor.emplace(0u, Poly::constant(nv, 1));
  std::vector<std::uint32_t> layer{0u};
  for (std::size_t row = 0; row < n; ++row) {
    std::map<std::uint32_t, Poly> next;
    for (std::uint32_t S : layer) {
      const Poly& base = minor.at(S);
      if (base.is_zero()) continue;
      for (std::size_t c = 0; c < n; ++c) {
        if (S & (1u << c)) continue;
        const Poly& a = columns[c][row];
        if (a.is_zero()) continue;
        // Sign of placing column c after the columns of S larger than c.
        const int larger = __builtin_popcount(S >> (c + 1));
        Poly term = base * a;
        if (larger % 2) term = -term;
        auto [it, inserted] = next.try_emplace(S | (1u << c), Poly(nv));
        it->second += term;
      }
    }
    layer.clear();
    for (auto& [S, p] : next) {
      layer.push_back(S);
      minor[S] = std::move(p);
    }
  }
  const std::uint32_t full = (n == 32) ? 0xFFFFFFFFu : ((1u << n) - 1u);
  auto it = minor.find(full);
  return it == minor.end() ? Poly(nv) : it->second;
}

Ideal minors_ideal(const std::vector<std::vector<Poly>>& columns, std::size_t n, std::size_t max_minors,
                   MonomialOrder order) {
  if (n == 0 || n > kMaxVars) throw DimensionMismatch("minors_ideal: bad row count");
  for (const auto& c : columns)
    if (c.size() != n) throw DimensionMismatch("minors_ideal: column has wrong number of rows");
  const std::size_t m = columns.size();
  if (m < n) return Ideal(n, {}, order);

  // Count C(m, n) up front to honour the cap before doing any work.
  double count = 1;
  for (std::size_t i = 0; i < n; ++i) count = count * static_cast<double>(m - i) / static_cast<double>(i + 1);
  if (count > static_cast<double>(max_minors))
    throw BudgetExhausted("minors_ideal: " + std::to_string(static_cast<long long>(count)) +
                          " minors exceed the cap of " + std::to_string(max_minors));

  std::vector<Poly> gens;
  std::vector<std::size_t> pick(n);
  for (std::size_t i = 0; i < n; ++i) pick[i] = i;
  while (true) {
    std::vector<std::vector<Poly>> sub;
    sub.reserve(n);
    for (auto c : pick) sub.push_back(columns[c]);
    Poly d = determinant(sub);
    if (!d.is_zero()) {
      d = d.monic(order);
      if (d.is_constant()) return Ideal(n, {d}, order);
      if (std::find(gens.begin(), gens.end(), d) == gens.end()) gens.push_back(std::move(d));
    }
    // Next n-combination of 0..m-1 in lexicographic order.
    std::size_t i = n;
    while (i > 0 && pick[i - 1] == m - n + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t k = i; k < n; ++k) pick[k] = pick[k - 1] + 1;
  }
  return Ideal(n, std::move(gens), order);
}

}  // namespace charflow
