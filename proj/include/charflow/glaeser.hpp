#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "charflow/smooth_expr.hpp"
#include "charflow/torus.hpp"

namespace charflow {

enum class CloudMetric { Euclidean, Torus };

/// Finite sample of a set, with sampling pitch `scale`. Under the torus metric
/// displacements are wrapped coordinate-wise into (-pi, pi].
class PointCloud {
 public:
  PointCloud(std::size_t dimension, std::vector<std::vector<double>> points, double scale,
             CloudMetric metric = CloudMetric::Euclidean);

  std::size_t dimension() const noexcept { return n_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  double scale() const noexcept { return scale_; }
  CloudMetric metric() const noexcept { return metric_; }
  const std::vector<double>& point(std::size_t i) const { return points_.at(i); }
  const std::vector<std::vector<double>>& points() const noexcept { return points_; }

  /// q - p for q = point(j), p = point(i).
  Eigen::VectorXd displacement(std::size_t i, std::size_t j) const;
  double distance(std::size_t i, std::size_t j) const;
  /// Indices within distance r of point i, i included, sorted by distance.
  std::vector<std::size_t> ball(std::size_t i, double r) const;
  PointCloud subset(const std::vector<std::size_t>& indices) const;
  /// Point coordinates as fed to field evaluation (wrapped under the torus metric).
  std::vector<double> chart(std::size_t i) const;

 private:
  std::size_t n_;
  std::vector<std::vector<double>> points_;
  double scale_;
  CloudMetric metric_;
};

/// Grid nodes where |expr| <= tol, as a torus-metric cloud with scale h.
PointCloud cloud_from_zero_set(const SmoothExpr& expr, const TorusGrid& grid, double tol = 1e-9);

struct GlaeserOptions {
  /// Secant ball radius in units of the cloud scale (>= 4).
  double r_outer_factor = 4.0;
  std::size_t pairs_cap = 8;
  double theta_tol_deg = 3.0;
  /// Discrete closure radius in units of the cloud scale.
  double closure_factor = 2.0;
  /// Singular values below sigma_max / rank_gap do not count.
  double rank_gap = 1e3;
};

/// Fiber of a cone field: unit directions, and after linearization an
/// orthonormal basis (columns) of a subspace.
struct Fiber {
  std::vector<Eigen::VectorXd> directions;
  Eigen::MatrixXd basis;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(basis.cols()); }
};

struct ConeField {
  std::vector<Fiber> fibers;
  bool linearized = false;
};

/// Cluster representatives of +-(p - q)/|p - q| over the pairs_cap pairs of
/// the r_outer-ball around point x nearest to x (pairs through x first on
/// ties). Empty when the ball holds a single point.
std::vector<Eigen::VectorXd> paratangent_cone(const PointCloud& cloud, std::size_t x, double r_outer,
                                              std::size_t pairs_cap, double theta_tol_deg = 3.0);

ConeField paratangent_field(const PointCloud& cloud, const GlaeserOptions& options = {});

/// Replaces every fiber by an orthonormal basis of the span of its directions.
ConeField linearize(const ConeField& field, const GlaeserOptions& options = {});

/// Discrete closure (neighbour fibers within closure_factor * scale) followed
/// by fiberwise linearization. Fibers only grow: a neighbour direction enters
/// when it is more than theta_tol away from the current subspace.
ConeField lambda_op(const ConeField& field, const PointCloud& cloud, const GlaeserOptions& options = {});

/// Linearized paratangent field with lambda_op applied 2n times.
ConeField zariski_tangent_estimate(const PointCloud& cloud, const GlaeserOptions& options = {});

/// Largest principal angle (radians) between the subspaces, pi/2 if the
/// dimensions differ.
double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct NumericChainOptions {
  GlaeserOptions glaeser;
  double theta_char_deg = 5.0;
  /// Relative vanishing floor: |X_j(p)| below floor_rel * max |X_j| on A_0 counts as tangent.
  double floor_rel = 1e-6;
  /// 0 picks n + 1.
  std::size_t max_k = 0;
};

struct NumericChainStep {
  std::size_t k = 0;
  PointCloud cloud;
  /// Index of every point of `cloud` in A_0.
  std::vector<std::size_t> source;
  std::vector<char> characteristic;
  std::vector<std::size_t> tangent_dim;
  std::size_t characteristic_count() const;
};

struct NumericChain {
  /// steps[k] holds A_k with its classification; the last step is unclassified
  /// when the chain emptied.
  std::vector<NumericChainStep> steps;
  double v_floor = 0.0;
  bool emptied = false;
  bool stabilized = false;
  std::string stop_reason;
};

/// p in A_k is characteristic iff every X_j(p) is within theta_char of the
/// estimated tangent subspace at p or below the vanishing floor.
std::vector<char> classify_characteristic(const SmoothFieldSystem& fields, const PointCloud& cloud,
                                          const ConeField& tangent, double theta_char_deg, double v_floor);

NumericChain numeric_char_chain(const SmoothFieldSystem& fields, const PointCloud& A0,
                                const NumericChainOptions& options = {});

}  // namespace charflow
