#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "charflow/poly.hpp"

namespace charflow {

/// Polynomial vector field X = sum_k b_k d/dx_k on an n-dimensional chart.
class PolyVectorField {
 public:
  PolyVectorField() = default;
  explicit PolyVectorField(std::vector<Poly> coeffs);
  static PolyVectorField zero(std::size_t n);
  /// The coordinate field d/dx_k.
  static PolyVectorField coordinate(std::size_t n, std::size_t k);

  std::size_t dimension() const noexcept { return coeffs_.size(); }
  const std::vector<Poly>& coeffs() const noexcept { return coeffs_; }
  const Poly& operator[](std::size_t k) const { return coeffs_.at(k); }
  bool is_zero() const noexcept;

  PolyVectorField operator+(const PolyVectorField& other) const;
  PolyVectorField operator-(const PolyVectorField& other) const;
  PolyVectorField scaled(const Poly& f) const;

  std::vector<double> evaluate(std::span<const double> point) const;

  friend bool operator==(const PolyVectorField&, const PolyVectorField&) = default;

 private:
  std::vector<Poly> coeffs_;
};

/// r polynomial vector fields on a chart with named coordinates.
class FieldSystem {
 public:
  FieldSystem(std::vector<std::string> variables, std::vector<PolyVectorField> fields);

  std::size_t dimension() const noexcept { return variables_.size(); }
  std::size_t size() const noexcept { return fields_.size(); }
  const std::vector<std::string>& variables() const noexcept { return variables_; }
  const std::vector<PolyVectorField>& fields() const noexcept { return fields_; }
  const PolyVectorField& field(std::size_t j) const { return fields_.at(j); }

  friend bool operator==(const FieldSystem&, const FieldSystem&) = default;

 private:
  std::vector<std::string> variables_;
  std::vector<PolyVectorField> fields_;
};

/// X f = sum_k b_k df/dx_k.
Poly apply_field(const PolyVectorField& X, const Poly& f);

/// [X, Y]_k = X(Y_k) - Y(X_k).
PolyVectorField lie_bracket(const PolyVectorField& X, const PolyVectorField& Y);

/// Left-nested bracket word (i_1, ..., i_k) with 0-based field indices,
/// standing for [X_{i_1}, [X_{i_2}, ..., [X_{i_{k-1}}, X_{i_k}]...]].
struct BracketWord {
  std::vector<std::size_t> indices;

  std::size_t length() const noexcept { return indices.size(); }
  /// 1-based rendering, e.g. "(1,2)".
  std::string to_string() const;
  friend bool operator==(const BracketWord&, const BracketWord&) = default;
};

struct BracketEntry {
  BracketWord word;
  PolyVectorField field;
};

/// Every left-nested bracket of length <= s, zero fields dropped, syntactic
/// duplicates removed keeping the shortest (then first-enumerated) word.
/// Words are enumerated by length, then lexicographically.
std::vector<BracketEntry> bracket_basis(const FieldSystem& sys, std::size_t s);

/// Parses the field-system grammar:
///
///     vars x, y;
///     field 1, 0;
///     field 0, x;
///
/// Statements end with ';' or a newline. Components are polynomial expressions
/// in + - * ^ (non-negative integer exponents), integer or p/q literals and
/// declared variable names. `#` starts a comment running to end of line.
FieldSystem parse_field_system(std::string_view text);

/// Parses a single polynomial expression over the given variables.
Poly parse_poly(std::string_view text, const std::vector<std::string>& variables);

/// Canonical printer emitting the same grammar; parse(format(s)) == s.
std::string format_field_system(const FieldSystem& sys);
std::string format_field(const PolyVectorField& X, const std::vector<std::string>& variables);

}  // namespace charflow
