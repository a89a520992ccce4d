#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace charflow {

/// Below this magnitude flat2(u) and flatabs(u) evaluate to exactly 0.
inline constexpr double kFlatThreshold = 1e-8;

/// exp(-1/u^2), extended by 0 at the origin.
double flat2(double u);
/// exp(-1/|u|), extended by 0 at the origin.
double flatabs(double u);

/// Smooth real expression over named variables:
///
///     expr  := term (('+' | '-') term)*
///     term  := unary (('*' | '/') unary)*
///     unary := '-' unary | power
///     power := atom ('^' ['-'] INT)?
///     atom  := NUMBER | 'pi' | NAME | FUNC '(' expr ')' | '(' expr ')'
///
/// FUNC is one of sin, cos, exp, flat2, flatabs. Division by zero raises
/// EvalError, except inside the argument of a flat primitive where it yields
/// +-inf (and flat2(+-inf) = 1).
class SmoothExpr {
 public:
  SmoothExpr();
  static SmoothExpr parse(std::string_view text, const std::vector<std::string>& variables);
  static SmoothExpr constant(double c);

  double evaluate(std::span<const double> point) const;
  /// True when the expression is the literal constant 0.
  bool is_zero_literal() const;
  const std::string& text() const noexcept { return text_; }
  std::size_t nvars() const noexcept { return nvars_; }

  struct Node;

 private:
  std::shared_ptr<const std::vector<Node>> nodes_;
  std::size_t root_ = 0;
  std::size_t nvars_ = 0;
  std::string text_;
};

/// Vector field with smooth-expression coefficients.
struct SmoothField {
  std::vector<SmoothExpr> coeffs;

  std::size_t dimension() const noexcept { return coeffs.size(); }
  std::vector<double> evaluate(std::span<const double> point) const;
};

struct SmoothFieldSystem {
  std::vector<std::string> variables;
  std::vector<SmoothField> fields;

  std::size_t dimension() const noexcept { return variables.size(); }
};

/// Builds a system from per-field component strings; validates counts.
SmoothFieldSystem parse_smooth_system(const std::vector<std::string>& variables,
                                      const std::vector<std::vector<std::string>>& components);

}  // namespace charflow
