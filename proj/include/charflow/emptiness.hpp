#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "charflow/ideal.hpp"

namespace charflow {

/// Where and how hard tier 2 looks for real points of a variety.
struct SearchBox {
  Rational radius{2};
  std::size_t grid_per_axis = 21;
  double tol_witness = 1e-18;

  void validate() const;
};

enum class EmptinessTag { EmptyCertified, NonEmptyWitness, Unknown };

const char* to_string(EmptinessTag tag);

struct EmptinessStatus {
  EmptinessTag tag = EmptinessTag::Unknown;
  /// Witness point and its sum-of-squares residual (NonEmptyWitness only).
  std::vector<double> point;
  double residual = 0.0;
  /// Why tier 1 did not certify (budget exhaustion, ...); empty otherwise.
  std::string note;

  bool empty_certified() const noexcept { return tag == EmptinessTag::EmptyCertified; }
  bool has_witness() const noexcept { return tag == EmptinessTag::NonEmptyWitness; }
};

/// F(p) = sum_i g_i(p)^2 with first and diagonal second partials.
class SumOfSquares {
 public:
  SumOfSquares(std::size_t nvars, std::span<const Poly> generators);

  std::size_t nvars() const noexcept { return nvars_; }
  double value(std::span<const double> x) const;
  /// Largest |g_i(x)|.
  double max_abs(std::span<const double> x) const;
  /// Coordinate-wise damped Newton on F from `start`; returns the final point.
  std::vector<double> descend(std::vector<double> start, double target, std::size_t max_sweeps = 400) const;
  /// Levenberg-Marquardt on the residual vector (g_i); follows curved valleys
  /// where coordinate descent stalls. Never increases F.
  std::vector<double> refine(std::vector<double> start, double target, std::size_t max_iterations = 200) const;

 private:
  std::size_t nvars_;
  std::vector<NumericPoly> gens_;
};

/// Tier 2 sampling: grid search over [-R, R]^n followed by local descent from
/// the best grid points. Returns up to `max_samples` distinct points with
/// F < tol_witness, spread out by farthest-point selection, best first.
std::vector<std::vector<double>> sample_variety(std::size_t nvars, std::span<const Poly> generators,
                                                const SearchBox& box, std::size_t max_samples);

/// Polishes `start` onto V(generators); returns the point when descent reaches
/// F < tol within `max_move` of the start.
std::optional<std::vector<double>> polish_onto(std::size_t nvars, std::span<const Poly> generators,
                                               std::span<const double> start, double tol, double max_move);

/// Tier 1: unit ideal => EmptyCertified. Tier 2: grid + descent witness with
/// residual < tol_witness => NonEmptyWitness. Otherwise Unknown. Budget
/// exhaustion in tier 1 degrades to tiers 2-3 and is recorded in `note`.
EmptinessStatus real_emptiness_status(const Ideal& ideal, const SearchBox& box, const GroebnerOptions& options = {});

}  // namespace charflow
