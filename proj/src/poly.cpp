#include "charflow/poly.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "charflow/errors.hpp"

namespace charflow {

Rational parse_rational(const std::string& text) {
  auto is_int = [](const std::string& s) {
    std::size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
    if (i >= s.size()) return false;
    return std::all_of(s.begin() + static_cast<std::ptrdiff_t>(i), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
  };
  const auto slash = text.find('/');
  const std::string num = text.substr(0, slash);
  const std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
  if (!is_int(num) || !is_int(den)) throw Error("malformed rational literal '" + text + "'");
  Rational q(mpz_class(num[0] == '+' ? num.substr(1) : num), mpz_class(den[0] == '+' ? den.substr(1) : den));
  if (q.get_den() == 0) throw Error("zero denominator in rational literal '" + text + "'");
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

double to_double(const Rational& q) { return q.get_d(); }

// ---------------------------------------------------------------------------
// Monomial

unsigned Monomial::degree() const noexcept {
  unsigned d = 0;
  for (auto e : exp) d += e;
  return d;
}

bool Monomial::divides(const Monomial& other) const noexcept {
  for (std::size_t i = 0; i < kMaxVars; ++i)
    if (exp[i] > other.exp[i]) return false;
  return true;
}

bool Monomial::coprime(const Monomial& other) const noexcept {
  for (std::size_t i = 0; i < kMaxVars; ++i)
    if (exp[i] != 0 && other.exp[i] != 0) return false;
  return true;
}

Monomial Monomial::operator*(const Monomial& other) const {
  Monomial r;
  for (std::size_t i = 0; i < kMaxVars; ++i) {
    const unsigned e = unsigned{exp[i]} + other.exp[i];
    if (e > 0xFFFFu) throw Error("monomial exponent overflow");
    r.exp[i] = static_cast<std::uint16_t>(e);
  }
  return r;
}

Monomial Monomial::operator/(const Monomial& divisor) const {
  Monomial r;
  for (std::size_t i = 0; i < kMaxVars; ++i) r.exp[i] = static_cast<std::uint16_t>(exp[i] - divisor.exp[i]);
  return r;
}

Monomial Monomial::lcm(const Monomial& other) const noexcept {
  Monomial r;
  for (std::size_t i = 0; i < kMaxVars; ++i) r.exp[i] = std::max(exp[i], other.exp[i]);
  return r;
}

bool Monomial::is_one() const noexcept {
  return std::all_of(exp.begin(), exp.end(), [](auto e) { return e == 0; });
}

const char* to_string(MonomialOrder order) {
  return order == MonomialOrder::Grevlex ? "grevlex" : "lex";
}

bool greater(MonomialOrder order, const Monomial& a, const Monomial& b) noexcept {
  if (order == MonomialOrder::Lex) {
    for (std::size_t i = 0; i < kMaxVars; ++i)
      if (a.exp[i] != b.exp[i]) return a.exp[i] > b.exp[i];
    return false;
  }
  const unsigned da = a.degree();
  const unsigned db = b.degree();
  if (da != db) return da > db;
  for (std::size_t i = kMaxVars; i-- > 0;)
    if (a.exp[i] != b.exp[i]) return a.exp[i] < b.exp[i];
  return false;
}

// ---------------------------------------------------------------------------
// Poly

Poly::Poly(std::size_t nvars) : nvars_(nvars) {
  if (nvars == 0 || nvars > kMaxVars)
    throw DimensionMismatch("polynomial ring dimension must be in 1.." + std::to_string(kMaxVars));
}

Poly Poly::constant(std::size_t nvars, const Rational& c) {
  Poly p(nvars);
  if (c != 0) p.terms_.push_back({Monomial{}, c});
  return p;
}

Poly Poly::variable(std::size_t nvars, std::size_t index) {
  Poly p(nvars);
  if (index >= nvars) throw DimensionMismatch("variable index out of range");
  Monomial m;
  m.exp[index] = 1;
  p.terms_.push_back({m, Rational(1)});
  return p;
}

Poly Poly::monomial(std::size_t nvars, const Monomial& m, const Rational& c) {
  Poly p(nvars);
  for (std::size_t i = nvars; i < kMaxVars; ++i)
    if (m.exp[i] != 0) throw DimensionMismatch("monomial uses a variable outside the ring");
  if (c != 0) p.terms_.push_back({m, c});
  return p;
}

Poly Poly::from_terms(std::size_t nvars, std::vector<Term> terms) {
  Poly p(nvars);
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return grevlex_greater(a.mono, b.mono); });
  for (auto& t : terms) {
    for (std::size_t i = nvars; i < kMaxVars; ++i)
      if (t.mono.exp[i] != 0) throw DimensionMismatch("monomial uses a variable outside the ring");
    if (!p.terms_.empty() && p.terms_.back().mono == t.mono) {
      p.terms_.back().coeff += t.coeff;
    } else {
      if (!p.terms_.empty() && p.terms_.back().coeff == 0) p.terms_.pop_back();
      p.terms_.push_back(std::move(t));
    }
  }
  if (!p.terms_.empty() && p.terms_.back().coeff == 0) p.terms_.pop_back();
  return p;
}

bool Poly::is_constant() const noexcept {
  return terms_.empty() || (terms_.size() == 1 && terms_.front().mono.is_one());
}

int Poly::degree() const noexcept {
  return terms_.empty() ? -1 : static_cast<int>(terms_.front().mono.degree());
}

const Term& Poly::leading_term() const {
  if (terms_.empty()) throw PreconditionError("leading term of the zero polynomial");
  return terms_.front();
}

std::size_t Poly::leading_index(MonomialOrder order) const {
  if (terms_.empty()) throw PreconditionError("leading term of the zero polynomial");
  if (order == MonomialOrder::Grevlex) return 0;
  std::size_t best = 0;
  for (std::size_t i = 1; i < terms_.size(); ++i)
    if (greater(order, terms_[i].mono, terms_[best].mono)) best = i;
  return best;
}

Rational Poly::coefficient(const Monomial& m) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), m,
                             [](const Term& t, const Monomial& key) { return grevlex_greater(t.mono, key); });
  if (it != terms_.end() && it->mono == m) return it->coeff;
  return Rational(0);
}

void Poly::check_same_ring(const Poly& other) const {
  if (nvars_ != other.nvars_)
    throw DimensionMismatch("polynomials live in rings of different dimension (" + std::to_string(nvars_) +
                            " vs " + std::to_string(other.nvars_) + ")");
}

Poly Poly::operator-() const {
  Poly r = *this;
  for (auto& t : r.terms_) t.coeff = -t.coeff;
  return r;
}

namespace {

template <typename Combine>
std::vector<Term> merge_terms(const std::vector<Term>& a, const std::vector<Term>& b, Combine combine_b) {
  std::vector<Term> out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && grevlex_greater(a[i].mono, b[j].mono))) {
      out.push_back(a[i++]);
    } else if (i == a.size() || grevlex_greater(b[j].mono, a[i].mono)) {
      out.push_back({b[j].mono, combine_b(Rational(0), b[j].coeff)});
      ++j;
    } else {
      Rational c = combine_b(a[i].coeff, b[j].coeff);
      if (c != 0) out.push_back({a[i].mono, std::move(c)});
      ++i;
      ++j;
    }
  }
  return out;
}

}  // namespace

Poly& Poly::operator+=(const Poly& other) {
  check_same_ring(other);
  terms_ = merge_terms(terms_, other.terms_, [](const Rational& x, const Rational& y) { return Rational(x + y); });
  return *this;
}

Poly& Poly::operator-=(const Poly& other) {
  check_same_ring(other);
  terms_ = merge_terms(terms_, other.terms_, [](const Rational& x, const Rational& y) { return Rational(x - y); });
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  a.check_same_ring(b);
  if (a.is_zero() || b.is_zero()) return Poly(a.nvars_);
  std::vector<Term> prod;
  prod.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& x : a.terms_)
    for (const auto& y : b.terms_) prod.push_back({x.mono * y.mono, x.coeff * y.coeff});
  return Poly::from_terms(a.nvars_, std::move(prod));
}

Poly Poly::scaled(const Rational& c) const {
  if (c == 0) return Poly(nvars_);
  Poly r = *this;
  for (auto& t : r.terms_) t.coeff *= c;
  return r;
}

Poly Poly::times_term(const Monomial& m, const Rational& c) const {
  if (c == 0) return Poly(nvars_);
  // Multiplying by a monomial preserves the order of the terms.
  Poly r(nvars_);
  r.terms_.reserve(terms_.size());
  for (const auto& t : terms_) r.terms_.push_back({t.mono * m, t.coeff * c});
  return r;
}

Poly Poly::monic(MonomialOrder order) const {
  if (terms_.empty()) return *this;
  const Rational lc = terms_[leading_index(order)].coeff;
  if (lc == 1) return *this;
  return scaled(Rational(1) / lc);
}

Poly Poly::derivative(std::size_t var) const {
  if (var >= nvars_) throw DimensionMismatch("derivative variable out of range");
  std::vector<Term> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) {
    if (t.mono.exp[var] == 0) continue;
    Term d{t.mono, t.coeff * static_cast<unsigned long>(t.mono.exp[var])};
    d.mono.exp[var] -= 1;
    out.push_back(std::move(d));
  }
  // Differentiation can reorder terms (degrees drop unevenly), so recanonicalize.
  return from_terms(nvars_, std::move(out));
}

Rational Poly::evaluate(std::span<const Rational> point) const {
  if (point.size() != nvars_) throw DimensionMismatch("evaluation point has wrong dimension");
  Rational acc(0);
  for (const auto& t : terms_) {
    Rational v = t.coeff;
    for (std::size_t i = 0; i < nvars_; ++i)
      for (unsigned k = 0; k < t.mono.exp[i]; ++k) v *= point[i];
    acc += v;
  }
  return acc;
}

double Poly::evaluate(std::span<const double> point) const { return NumericPoly(*this).value(point); }

bool operator==(const Poly& a, const Poly& b) {
  if (a.nvars_ != b.nvars_ || a.terms_.size() != b.terms_.size()) return false;
  for (std::size_t i = 0; i < a.terms_.size(); ++i)
    if (!(a.terms_[i].mono == b.terms_[i].mono) || a.terms_[i].coeff != b.terms_[i].coeff) return false;
  return true;
}

std::string Poly::to_string(std::span<const std::string> names) const {
  if (names.size() != nvars_) throw DimensionMismatch("variable-name list has wrong length");
  if (terms_.empty()) return "0";
  std::ostringstream os;
  bool first = true;
  for (const auto& t : terms_) {
    Rational c = t.coeff;
    const bool negative = c < 0;
    if (negative) c = -c;
    if (first) {
      if (negative) os << "-";
    } else {
      os << (negative ? " - " : " + ");
    }
    first = false;
    bool wrote = false;
    if (c != 1 || t.mono.is_one()) {
      os << c.get_str();
      wrote = true;
    }
    for (std::size_t i = 0; i < nvars_; ++i) {
      if (t.mono.exp[i] == 0) continue;
      if (wrote) os << "*";
      os << names[i];
      if (t.mono.exp[i] > 1) os << "^" << t.mono.exp[i];
      wrote = true;
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// NumericPoly

NumericPoly::NumericPoly(const Poly& p) : nvars_(p.nvars()) {
  terms_.reserve(p.size());
  for (const auto& t : p.terms()) terms_.push_back({t.coeff.get_d(), t.mono.exp});
}

double NumericPoly::eval_with(std::span<const double> x, std::size_t var, int order) const {
  if (x.size() != nvars_) throw DimensionMismatch("evaluation point has wrong dimension");
  double acc = 0.0;
  for (const auto& t : terms_) {
    double v = t.coeff;
    for (std::size_t i = 0; i < nvars_ && v != 0.0; ++i) {
      int e = t.exp[i];
      if (i == var) {
        if (e < order) {
          v = 0.0;
          break;
        }
        for (int k = 0; k < order; ++k) v *= static_cast<double>(e - k);
        e -= order;
      }
      for (int k = 0; k < e; ++k) v *= x[i];
    }
    acc += v;
  }
  return acc;
}

double NumericPoly::value(std::span<const double> x) const { return eval_with(x, kMaxVars, 0); }
double NumericPoly::partial(std::size_t var, std::span<const double> x) const { return eval_with(x, var, 1); }
double NumericPoly::second_partial(std::size_t var, std::span<const double> x) const {
  return eval_with(x, var, 2);
}

}  // namespace charflow
