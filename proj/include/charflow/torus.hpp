#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "charflow/smooth_expr.hpp"

namespace charflow {

/// Periodic grid on the flat torus (R / 2 pi Z)^n, n in {1, 2, 3}, with N
/// nodes per axis (a power of two) and lexicographic node order (axis 0
/// fastest).
class TorusGrid {
 public:
  TorusGrid(std::size_t n, std::size_t N);

  std::size_t dimension() const noexcept { return n_; }
  std::size_t points_per_axis() const noexcept { return N_; }
  std::size_t size() const noexcept { return total_; }
  double spacing() const noexcept { return h_; }
  /// h^n, the volume of one cell.
  double cell_volume() const noexcept { return cell_; }

  std::array<std::size_t, 3> multi_index(std::size_t node) const;
  std::size_t node(const std::array<std::size_t, 3>& multi) const;
  /// Coordinates h * index_i in [0, 2 pi).
  std::vector<double> coords(std::size_t node) const;
  /// Neighbour `step` cells along `axis`, with periodic wrap.
  std::size_t shift(std::size_t node, std::size_t axis, long step) const;

 private:
  std::size_t n_, N_, total_;
  double h_, cell_;
  std::array<std::size_t, 3> stride_{};
};

/// Wraps an angle into (-pi, pi].
double wrap_angle(double x);

/// Discretization of E(f) = sum_j int |X_j f|^2 rho dx on a torus grid.
///
/// With D+_j and D-_j the forward and backward one-sided difference versions of
/// X_j and R = diag(rho h^n), the operator is
///     P = 1/2 sum_j (D+_j^T R D+_j + D-_j^T R D-_j),
/// so f^T P f = 1/2 sum_j (|D+_j f|_R^2 + |D-_j f|_R^2) >= 0.
class SparseSymOperator {
 public:
  SparseSymOperator(const SmoothFieldSystem& fields, const TorusGrid& grid, const std::optional<SmoothExpr>& density);

  const TorusGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return grid_.size(); }
  /// Assembled P; symmetric entry by entry.
  const Eigen::SparseMatrix<double>& matrix() const noexcept { return P_; }
  /// Diagonal of the mass matrix, rho(p) h^n.
  const Eigen::VectorXd& mass() const noexcept { return mass_; }
  const std::string& assembled_as() const noexcept { return assembled_as_; }
  std::size_t field_count() const noexcept { return r_; }

  /// P f computed in factored form; differences are formed before scaling, so
  /// constants map to exactly 0.
  Eigen::VectorXd apply(const Eigen::VectorXd& f) const;
  /// D+_j f or D-_j f at every node.
  Eigen::VectorXd difference(std::size_t j, bool forward, const Eigen::VectorXd& f) const;
  /// 1/2 sum_j (|D+_j f|_R^2 + |D-_j f|_R^2), evaluated from the stencils.
  double energy(const Eigen::VectorXd& f) const;
  /// f^T M f.
  double mass_norm_sq(const Eigen::VectorXd& f) const;
  /// max_i sum_k |P_ik| of M^{-1/2} P M^{-1/2}.
  double normalized_inf_norm() const;

 private:
  TorusGrid grid_;
  std::size_t r_;
  /// coeff_[j * n + k][p] = b_jk(p) / h
  std::vector<Eigen::VectorXd> coeff_;
  Eigen::VectorXd mass_;
  Eigen::SparseMatrix<double> P_;
  std::string assembled_as_;
};

SparseSymOperator assemble_operator(const SmoothFieldSystem& fields, const TorusGrid& grid,
                                    const std::optional<SmoothExpr>& density = std::nullopt);

/// Samples an expression at every node.
Eigen::VectorXd sample(const SmoothExpr& expr, const TorusGrid& grid);

struct EigenOptions {
  /// Relative residual for the inner conjugate-gradient solves.
  double cg_tol = 1e-12;
  std::size_t cg_max_iterations = 50000;
  /// Lanczos vectors per restart cycle; 0 picks max(2m + 20, 40).
  std::size_t krylov_dim = 0;
  std::size_t max_cycles = 80;
  /// Residual target relative to the infinity norm of the normalized operator.
  double residual_tol = 1e-7;
  std::uint64_t seed = 0;
};

/// Smallest eigenpairs of the pencil (P, M), i.e. of A = M^{-1/2} P M^{-1/2}.
struct EigenResult {
  std::vector<double> values;
  /// Column i holds the eigenfunction f_i = M^{-1/2} w_i; columns are
  /// M-orthonormal.
  Eigen::MatrixXd functions;
  /// |A w_i - lambda_i w_i| for the unit vectors w_i.
  std::vector<double> residuals;
  double operator_norm = 0.0;
  bool converged = false;
  std::size_t cg_iterations = 0;
  double worst_cg_residual = 0.0;
  std::string note;
};

/// Shift-invert Lanczos with shift -1: Lanczos on (A + I)^{-1} with full
/// reorthogonalization, locking converged Ritz pairs and restarting in their
/// orthogonal complement until no new Ritz value falls below the m-th locked
/// eigenvalue. Inner solves use Jacobi-preconditioned conjugate gradients.
EigenResult smallest_eigs(const SparseSymOperator& P, std::size_t m, const EigenOptions& options = {});

/// Node set {p : |expr(p)| <= tol}.
std::vector<char> mask_from_expr(const SmoothExpr& expr, const TorusGrid& grid, double tol);

/// Periodic L1 (grid graph) distance, in cells, from every node to the mask;
/// SIZE_MAX where the mask is empty.
std::vector<std::size_t> graph_distance(const std::vector<char>& mask, const TorusGrid& grid);

/// Nodes within ceil(radius / h) cells of the mask.
std::vector<char> dilate(const std::vector<char>& mask, const TorusGrid& grid, double radius);

struct SpectrumEntry {
  std::size_t resolution = 0;
  std::vector<double> eigenvalues;
  /// Fraction of each eigenfunction's mass within distance delta of the
  /// marked set (0 when no set is marked).
  std::vector<double> localization;
  std::vector<double> residuals;
  bool converged = false;
};

struct SpectralReport {
  std::vector<SpectrumEntry> entries;
  std::vector<std::string> warnings;
};

struct SpectrumJob {
  SmoothFieldSystem fields;
  std::optional<SmoothExpr> density;
  std::vector<std::size_t> resolutions;
  std::size_t m = 5;
  std::optional<SmoothExpr> marked;
  double marked_tol = 1e-9;
  double delta = 0.5;
  EigenOptions eigen;
};

SpectralReport spectral_report(const SpectrumJob& job);

/// One row of the scaling table.
struct ScalingRow {
  double t;
  double l2_norm_sq;
  double energy;
};

/// Bump eta = prod_{i in slice} phi(x_i / w) prod_{i not in slice} phi(x_i / w),
/// phi(u) = exp(-1 / (1 - u^2)) on |u| < 1, w = pi / 2, rescaled as
/// eta_t = t^{s/2} eta(t x_slice, x_rest) with coordinates wrapped to (-pi, pi].
Eigen::VectorXd scaled_bump(const TorusGrid& grid, const std::vector<std::size_t>& slice_axes, double t);

/// Quadrature values of |eta_t|^2 and E(eta_t) for every t. Throws
/// PreconditionError when the bump has fewer than 8 nodes across its support
/// along a scaled axis.
std::vector<ScalingRow> weierstrass_scaling_test(const SparseSymOperator& P, const std::vector<std::size_t>& slice_axes,
                                                 const std::vector<double>& t_values);

struct ConcentrationRow {
  double eps;
  double C;
  /// Index of the maximizing probe (SIZE_MAX if every probe contributes 0).
  std::size_t argmax;
  std::size_t u_size;
  std::size_t v_minus_u_size;
};

struct ConcentrationOptions {
  std::size_t eigen_probes = 10;
  std::size_t random_probes = 20;
  std::uint64_t seed = 0;
  EigenOptions eigen;
};

/// C(eps) = max over probes f of (|f|^2_{U_eps} - eps E(f))_+ / |f|^2_{V \ U_eps},
/// U_eps = nodes within ceil(eps / h) cells of A. Probes are the lowest
/// eigenfunctions of P and random band-limited fields (|frequency| <= N/8).
std::vector<ConcentrationRow> concentration_test(const SparseSymOperator& P, const std::vector<char>& A,
                                                 const std::vector<char>& V, const std::vector<double>& eps_values,
                                                 const ConcentrationOptions& options = {});

/// Random real trigonometric polynomial with frequencies |k_i| <= kmax.
Eigen::VectorXd band_limited_field(const TorusGrid& grid, std::size_t kmax, std::uint64_t seed);

}  // namespace charflow
