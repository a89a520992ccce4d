#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace charflow {

/// Exact rational number. GMP keeps every value in lowest terms with a
/// positive denominator, so equality is structural.
using Rational = mpq_class;

/// Parses "p" or "p/q" (decimal integers) into a canonical rational.
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);
double to_double(const Rational& q);

/// Upper bound on the number of variables of a polynomial ring.
inline constexpr std::size_t kMaxVars = 8;

struct Monomial {
  std::array<std::uint16_t, kMaxVars> exp{};

  unsigned degree() const noexcept;
  bool divides(const Monomial& other) const noexcept;
  bool coprime(const Monomial& other) const noexcept;
  Monomial operator*(const Monomial& other) const;
  /// Requires `divisor.divides(*this)`.
  Monomial operator/(const Monomial& divisor) const;
  Monomial lcm(const Monomial& other) const noexcept;
  bool is_one() const noexcept;

  friend bool operator==(const Monomial&, const Monomial&) = default;
};

enum class MonomialOrder { Grevlex, Lex };

const char* to_string(MonomialOrder order);

/// Strict "a > b" in the given order.
bool greater(MonomialOrder order, const Monomial& a, const Monomial& b) noexcept;
inline bool grevlex_greater(const Monomial& a, const Monomial& b) noexcept {
  return greater(MonomialOrder::Grevlex, a, b);
}

struct Term {
  Monomial mono;
  Rational coeff;
};

/// Multivariate polynomial with rational coefficients in `nvars` variables.
///
/// Terms are stored in strictly descending graded reverse lexicographic order
/// with no zero coefficients, which makes the representation canonical:
/// two polynomials are equal iff their term lists are equal.
class Poly {
 public:
  Poly() = default;
  explicit Poly(std::size_t nvars);

  static Poly constant(std::size_t nvars, const Rational& c);
  static Poly variable(std::size_t nvars, std::size_t index);
  static Poly monomial(std::size_t nvars, const Monomial& m, const Rational& c);
  /// Builds a canonical polynomial from arbitrary (possibly repeated, possibly zero) terms.
  static Poly from_terms(std::size_t nvars, std::vector<Term> terms);

  std::size_t nvars() const noexcept { return nvars_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }
  bool is_zero() const noexcept { return terms_.empty(); }
  bool is_constant() const noexcept;
  /// Total degree; -1 for the zero polynomial.
  int degree() const noexcept;

  /// Leading term under grevlex (the storage order).
  const Term& leading_term() const;
  /// Index of the leading term under an arbitrary order.
  std::size_t leading_index(MonomialOrder order) const;

  /// Coefficient of `m` (zero when absent).
  Rational coefficient(const Monomial& m) const;

  Poly operator-() const;
  Poly& operator+=(const Poly& other);
  Poly& operator-=(const Poly& other);
  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly scaled(const Rational& c) const;
  Poly times_term(const Monomial& m, const Rational& c) const;
  /// Divides every coefficient by the leading coefficient (no-op for zero).
  Poly monic(MonomialOrder order = MonomialOrder::Grevlex) const;

  Poly derivative(std::size_t var) const;

  Rational evaluate(std::span<const Rational> point) const;
  double evaluate(std::span<const double> point) const;

  friend bool operator==(const Poly& a, const Poly& b);

  std::string to_string(std::span<const std::string> names) const;

 private:
  void check_same_ring(const Poly& other) const;

  std::size_t nvars_ = 0;
  std::vector<Term> terms_;
};

/// Numeric view of a polynomial for fast double-precision evaluation of
/// values and first/second partial derivatives.
class NumericPoly {
 public:
  NumericPoly() = default;
  explicit NumericPoly(const Poly& p);

  std::size_t nvars() const noexcept { return nvars_; }
  double value(std::span<const double> x) const;
  double partial(std::size_t var, std::span<const double> x) const;
  double second_partial(std::size_t var, std::span<const double> x) const;

 private:
  struct NTerm {
    double coeff;
    std::array<std::uint16_t, kMaxVars> exp;
  };
  double eval_with(std::span<const double> x, std::size_t var, int order) const;

  std::size_t nvars_ = 0;
  std::vector<NTerm> terms_;
};

}  // namespace charflow
