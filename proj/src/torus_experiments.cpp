#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "charflow/errors.hpp"
#include "charflow/torus.hpp"

namespace charflow {

SpectralReport spectral_report(const SpectrumJob& job) {
  if (job.resolutions.empty()) throw PreconditionError("at least one resolution is required");
  SpectralReport report;
  for (std::size_t N : job.resolutions) {
    TorusGrid grid(job.fields.dimension(), N);
    const SparseSymOperator P = assemble_operator(job.fields, grid, job.density);
    const EigenResult eig = smallest_eigs(P, job.m, job.eigen);
    SpectrumEntry e;
    e.resolution = N;
    e.eigenvalues = eig.values;
    e.residuals = eig.residuals;
    e.converged = eig.converged;
    std::vector<char> near;
    if (job.marked) near = dilate(mask_from_expr(*job.marked, grid, job.marked_tol), grid, job.delta);
    for (Eigen::Index i = 0; i < eig.functions.cols(); ++i) {
      const Eigen::VectorXd f = eig.functions.col(i);
      double inside = 0.0;
      const double total = P.mass_norm_sq(f);
      if (!near.empty())
        for (std::size_t p = 0; p < grid.size(); ++p)
          if (near[p]) inside += P.mass()(static_cast<Eigen::Index>(p)) * f(static_cast<Eigen::Index>(p)) * f(static_cast<Eigen::Index>(p));
      e.localization.push_back(total > 0 ? inside / total : 0.0);
    }
    if (!eig.note.empty()) report.warnings.push_back("N=" + std::to_string(N) + ": " + eig.note);
    report.entries.push_back(std::move(e));
  }
  report.warnings.push_back(
      "heuristic: eigenvalue trends under refinement indicate, but do not prove, (non)precompactness");
  return report;
}

namespace {

constexpr double kBumpWidth = std::numbers::pi / 2.0;

double phi(double u) {
  if (std::abs(u) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - u * u));
}

}  // namespace

Eigen::VectorXd scaled_bump(const TorusGrid& grid, const std::vector<std::size_t>& slice_axes, double t) {
  const std::size_t n = grid.dimension();
  std::vector<char> scaled(n, 0);
  for (std::size_t a : slice_axes) {
    if (a >= n) throw PreconditionError("slice axis out of range");
    scaled[a] = 1;
  }
  const double s = static_cast<double>(slice_axes.size());
  const double amp = std::pow(t, s / 2.0);
  Eigen::VectorXd f(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto x = grid.coords(p);
    double v = amp;
    for (std::size_t i = 0; i < n; ++i) {
      const double xi = wrap_angle(x[i]);
      v *= phi((scaled[i] ? t * xi : xi) / kBumpWidth);
    }
    f(static_cast<Eigen::Index>(p)) = v;
  }
  return f;
}

std::vector<ScalingRow> weierstrass_scaling_test(const SparseSymOperator& P, const std::vector<std::size_t>& slice_axes,
                                                 const std::vector<double>& t_values) {
  if (slice_axes.empty()) throw PreconditionError("slice must name at least one axis");
  std::vector<ScalingRow> rows;
  for (double t : t_values) {
    if (!(t >= 1.0)) throw PreconditionError("scaling parameter t must be >= 1");
    const double across = 2.0 * kBumpWidth / (t * P.grid().spacing());
    if (across < 8.0 - 1e-9)
      throw PreconditionError("t = " + std::to_string(t) + " leaves only " + std::to_string(across) +
                              " nodes across the bump support (need 8)");
    const Eigen::VectorXd f = scaled_bump(P.grid(), slice_axes, t);
    rows.push_back({t, P.mass_norm_sq(f), P.energy(f)});
  }
  return rows;
}

std::vector<ConcentrationRow> concentration_test(const SparseSymOperator& P, const std::vector<char>& A,
                                                 const std::vector<char>& V, const std::vector<double>& eps_values,
                                                 const ConcentrationOptions& options) {
  const TorusGrid& grid = P.grid();
  if (A.size() != grid.size() || V.size() != grid.size()) throw DimensionMismatch("mask size differs from grid size");
  if (options.eigen_probes + options.random_probes < 20) throw PreconditionError("at least 20 probes are required");
  std::size_t a_count = 0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    if (A[p] && !V[p]) throw PreconditionError("marked set A must lie inside the neighbourhood V");
    a_count += A[p] != 0;
  }
  if (a_count == 0) throw PreconditionError("marked set A is empty on this grid");

  std::vector<Eigen::VectorXd> probes;
  if (options.eigen_probes > 0) {
    EigenOptions eo = options.eigen;
    eo.seed = options.seed;
    const EigenResult eig = smallest_eigs(P, options.eigen_probes, eo);
    for (Eigen::Index i = 0; i < eig.functions.cols(); ++i) probes.push_back(eig.functions.col(i));
  }
  const std::size_t kmax = std::max<std::size_t>(1, grid.points_per_axis() / 8);
  for (std::size_t i = 0; i < options.random_probes; ++i)
    probes.push_back(band_limited_field(grid, kmax, options.seed * 1000003ULL + i + 1));

  std::vector<double> energy;
  for (const auto& f : probes) energy.push_back(P.energy(f));

  std::vector<ConcentrationRow> rows;
  for (double eps : eps_values) {
    if (!(eps > 0)) throw PreconditionError("eps values must be positive");
    std::vector<char> U = dilate(A, grid, eps);
    std::size_t u_size = 0, rest = 0;
    for (std::size_t p = 0; p < grid.size(); ++p) {
      U[p] = U[p] && V[p];
      u_size += U[p] != 0;
      rest += (V[p] && !U[p]) ? 1 : 0;
    }
    if (rest == 0) throw PreconditionError("V \\ U_eps is empty for eps = " + std::to_string(eps));
    ConcentrationRow row{eps, 0.0, std::numeric_limits<std::size_t>::max(), u_size, rest};
    for (std::size_t i = 0; i < probes.size(); ++i) {
      double in_u = 0.0, outside = 0.0;
      for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto ip = static_cast<Eigen::Index>(p);
        const double w = P.mass()(ip) * probes[i](ip) * probes[i](ip);
        if (U[p]) in_u += w;
        else if (V[p]) outside += w;
      }
      const double num = std::max(0.0, in_u - eps * energy[i]);
      if (num == 0.0) continue;
      const double c = outside > 0.0 ? num / outside : std::numeric_limits<double>::infinity();
      if (c > row.C) {
        row.C = c;
        row.argmax = i;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace charflow
