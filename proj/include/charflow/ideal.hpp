#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "charflow/poly.hpp"

namespace charflow {

struct GroebnerOptions {
  /// Maximum number of S-polynomial reductions before giving up.
  std::size_t spair_budget = 200000;
  /// Maximum number of elementary reduction steps (one leading-term
  /// cancellation each) over the whole computation.
  std::size_t step_budget = 50000000;
};

/// Polynomial ideal given by generators, optionally carrying its reduced
/// Groebner basis. Values are immutable; `groebner` returns a new Ideal.
class Ideal {
 public:
  /// Zero generators are dropped; an empty list is the zero ideal.
  Ideal(std::size_t nvars, std::vector<Poly> generators, MonomialOrder order = MonomialOrder::Grevlex);

  static Ideal unit(std::size_t nvars, MonomialOrder order = MonomialOrder::Grevlex);

  std::size_t nvars() const noexcept { return nvars_; }
  MonomialOrder order() const noexcept { return order_; }
  const std::vector<Poly>& generators() const noexcept { return generators_; }
  bool is_zero_ideal() const noexcept { return generators_.empty(); }

  bool has_basis() const noexcept { return basis_.has_value(); }
  /// Reduced Groebner basis, sorted by descending leading monomial.
  /// Throws PreconditionError when not computed.
  const std::vector<Poly>& basis() const;
  /// Reduced basis when available, raw generators otherwise.
  const std::vector<Poly>& best_generators() const noexcept { return basis_ ? *basis_ : generators_; }
  /// Number of S-pair reductions spent computing the cached basis.
  std::size_t spair_reductions() const noexcept { return spair_reductions_; }

  Ideal with_basis(std::vector<Poly> basis, std::size_t spair_reductions) const;

 private:
  std::size_t nvars_;
  MonomialOrder order_;
  std::vector<Poly> generators_;
  std::optional<std::vector<Poly>> basis_;
  std::size_t spair_reductions_ = 0;
};

/// Buchberger's algorithm with the normal selection strategy and both
/// Buchberger criteria; output basis is reduced and monic.
/// Throws BudgetExhausted when a cap in `options` is hit.
Ideal groebner(const Ideal& ideal, const GroebnerOptions& options = {});

/// Fully reduces `f` by `divisors` (any generating set). With a reduced
/// Groebner basis the remainder is the unique normal form.
Poly reduce(const Poly& f, std::span<const Poly> divisors, MonomialOrder order);

/// Remainder of `f` modulo the cached reduced basis of `ideal`.
Poly normal_form(const Poly& f, const Ideal& ideal);

bool is_member(const Poly& f, const Ideal& ideal);

/// True iff 1 lies in the ideal (computes the basis when absent).
bool contains_one(const Ideal& ideal, const GroebnerOptions& options = {});

/// Exact determinant of a square polynomial matrix given by columns.
Poly determinant(const std::vector<std::vector<Poly>>& columns);

/// Ideal of all n x n minors of the n x m matrix whose columns are given.
/// m < n yields the zero ideal. Throws BudgetExhausted past `max_minors`.
Ideal minors_ideal(const std::vector<std::vector<Poly>>& columns, std::size_t n,
                   std::size_t max_minors = 200000, MonomialOrder order = MonomialOrder::Grevlex);

}  // namespace charflow
