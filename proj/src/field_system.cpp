#include "charflow/field_system.hpp"

#include <algorithm>
#include <set>

#include "charflow/errors.hpp"

namespace charflow {

PolyVectorField::PolyVectorField(std::vector<Poly> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw DimensionMismatch("vector field needs at least one component");
  for (const auto& c : coeffs_)
    if (c.nvars() != coeffs_.size())
      throw DimensionMismatch("vector field component lives in a ring of dimension " + std::to_string(c.nvars()) +
                              ", expected " + std::to_string(coeffs_.size()));
}

PolyVectorField PolyVectorField::zero(std::size_t n) { return PolyVectorField(std::vector<Poly>(n, Poly(n))); }

PolyVectorField PolyVectorField::coordinate(std::size_t n, std::size_t k) {
  std::vector<Poly> c(n, Poly(n));
  c.at(k) = Poly::constant(n, 1);
  return PolyVectorField(std::move(c));
}

bool PolyVectorField::is_zero() const noexcept {
  return std::all_of(coeffs_.begin(), coeffs_.end(), [](const Poly& p) { return p.is_zero(); });
}

PolyVectorField PolyVectorField::operator+(const PolyVectorField& other) const {
  if (dimension() != other.dimension()) throw DimensionMismatch("adding fields of different dimension");
  std::vector<Poly> c = coeffs_;
  for (std::size_t k = 0; k < c.size(); ++k) c[k] += other.coeffs_[k];
  return PolyVectorField(std::move(c));
}

PolyVectorField PolyVectorField::operator-(const PolyVectorField& other) const {
  if (dimension() != other.dimension()) throw DimensionMismatch("subtracting fields of different dimension");
  std::vector<Poly> c = coeffs_;
  for (std::size_t k = 0; k < c.size(); ++k) c[k] -= other.coeffs_[k];
  return PolyVectorField(std::move(c));
}

PolyVectorField PolyVectorField::scaled(const Poly& f) const {
  std::vector<Poly> c;
  c.reserve(coeffs_.size());
  for (const auto& b : coeffs_) c.push_back(b * f);
  return PolyVectorField(std::move(c));
}

std::vector<double> PolyVectorField::evaluate(std::span<const double> point) const {
  std::vector<double> v;
  v.reserve(coeffs_.size());
  for (const auto& b : coeffs_) v.push_back(b.evaluate(point));
  return v;
}

FieldSystem::FieldSystem(std::vector<std::string> variables, std::vector<PolyVectorField> fields)
    : variables_(std::move(variables)), fields_(std::move(fields)) {
  if (variables_.empty()) throw DimensionMismatch("field system needs at least one variable");
  if (fields_.empty()) throw PreconditionError("field system needs at least one field");
  std::set<std::string> seen;
  for (const auto& v : variables_)
    if (!seen.insert(v).second) throw PreconditionError("duplicate variable name '" + v + "'");
  for (const auto& X : fields_)
    if (X.dimension() != variables_.size()) throw DimensionMismatch("field dimension differs from variable count");
}

Poly apply_field(const PolyVectorField& X, const Poly& f) {
  if (X.dimension() != f.nvars())
    throw DimensionMismatch("applying a " + std::to_string(X.dimension()) + "-dimensional field to a polynomial in " +
                            std::to_string(f.nvars()) + " variables");
  Poly out(f.nvars());
  for (std::size_t k = 0; k < X.dimension(); ++k) {
    if (X[k].is_zero()) continue;
    Poly d = f.derivative(k);
    if (d.is_zero()) continue;
    out += X[k] * d;
  }
  return out;
}

PolyVectorField lie_bracket(const PolyVectorField& X, const PolyVectorField& Y) {
  if (X.dimension() != Y.dimension()) throw DimensionMismatch("bracket of fields of different dimension");
  std::vector<Poly> c;
  c.reserve(X.dimension());
  for (std::size_t k = 0; k < X.dimension(); ++k) c.push_back(apply_field(X, Y[k]) - apply_field(Y, X[k]));
  return PolyVectorField(std::move(c));
}

std::string BracketWord::to_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(indices[i] + 1);
  }
  return s + ")";
}

std::vector<BracketEntry> bracket_basis(const FieldSystem& sys, std::size_t s) {
  if (s == 0) throw PreconditionError("bracket length bound s must be >= 1");
  const std::size_t r = sys.size();

  // Words of length k are [X_i, w] for words w of length k-1. Zero brackets are
  // still needed as suffixes only if nonzero; a zero suffix stays zero, so it
  // is pruned from the frontier.
  std::vector<BracketEntry> all;
  std::vector<BracketEntry> frontier;
  for (std::size_t i = 0; i < r; ++i) frontier.push_back({BracketWord{{i}}, sys.field(i)});

  for (std::size_t len = 1;; ++len) {
    for (const auto& e : frontier) all.push_back(e);
    if (len == s) break;
    std::vector<BracketEntry> next;
    for (std::size_t i = 0; i < r; ++i) {
      for (const auto& e : frontier) {
        if (e.field.is_zero()) continue;
        BracketWord w;
        w.indices.reserve(len + 1);
        w.indices.push_back(i);
        w.indices.insert(w.indices.end(), e.word.indices.begin(), e.word.indices.end());
        next.push_back({std::move(w), lie_bracket(sys.field(i), e.field)});
      }
    }
    frontier = std::move(next);
  }

  std::vector<BracketEntry> kept;
  for (auto& e : all) {
    if (e.field.is_zero()) continue;
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const BracketEntry& k) { return k.field == e.field; });
    if (!dup) kept.push_back(std::move(e));
  }
  return kept;
}

}  // namespace charflow
