#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/IterativeLinearSolvers>

#include "charflow/errors.hpp"
#include "charflow/torus.hpp"

namespace charflow {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Two passes of classical Gram-Schmidt against the first `cols` columns.
void orthogonalize(Vec& v, const Mat& basis, Eigen::Index cols) {
  if (cols == 0) return;
  for (int pass = 0; pass < 2; ++pass) {
    const Vec c = basis.leftCols(cols).transpose() * v;
    v -= basis.leftCols(cols) * c;
  }
}

struct ShiftInvert {
  const Eigen::SparseMatrix<double>& P;
  Vec sqrt_mass;
  Eigen::SparseMatrix<double> K;  // P + M
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper, Eigen::DiagonalPreconditioner<double>> cg;
  std::size_t iterations = 0;
  double worst_error = 0.0;

  ShiftInvert(const SparseSymOperator& op, const EigenOptions& options) : P(op.matrix()) {
    sqrt_mass = op.mass().cwiseSqrt();
    Eigen::SparseMatrix<double> M(P.rows(), P.cols());
    M.reserve(Eigen::VectorXi::Constant(P.cols(), 1));
    for (Eigen::Index i = 0; i < P.rows(); ++i) M.insert(i, i) = op.mass()(i);
    K = P + M;
    cg.setTolerance(options.cg_tol);
    cg.setMaxIterations(static_cast<Eigen::Index>(options.cg_max_iterations));
    cg.compute(K);
  }

  /// A x with A = M^{-1/2} P M^{-1/2}.
  Vec apply_A(const Vec& x) const { return (P * x.cwiseQuotient(sqrt_mass)).cwiseQuotient(sqrt_mass); }

  /// (A + I)^{-1} x = M^{1/2} (P + M)^{-1} M^{1/2} x.
  Vec solve(const Vec& x) {
    const Vec rhs = x.cwiseProduct(sqrt_mass);
    const Vec z = cg.solve(rhs);
    iterations += static_cast<std::size_t>(cg.iterations());
    worst_error = std::max(worst_error, cg.error());
    return z.cwiseProduct(sqrt_mass);
  }
};

}  // namespace

EigenResult smallest_eigs(const SparseSymOperator& op, std::size_t m, const EigenOptions& options) {
  if (m == 0 || m > 50) throw PreconditionError("eigenpair count must be between 1 and 50");
  const auto dim = static_cast<Eigen::Index>(op.size());
  if (static_cast<Eigen::Index>(m) > dim) throw PreconditionError("more eigenpairs requested than grid points");

  ShiftInvert B(op, options);
  EigenResult res;
  res.operator_norm = op.normalized_inf_norm();
  const double tol = options.residual_tol * std::max(res.operator_norm, 1.0);

  const Eigen::Index kdim = static_cast<Eigen::Index>(options.krylov_dim ? options.krylov_dim : std::max<std::size_t>(2 * m + 20, 40));
  Mat locked(dim, 0);
  std::vector<double> locked_values;
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal;
  Vec restart;

  auto mth_locked = [&]() {
    std::vector<double> v = locked_values;
    std::sort(v.begin(), v.end());
    return v[m - 1];
  };

  bool done = false;
  for (std::size_t cycle = 0; cycle < options.max_cycles && !done; ++cycle) {
    const Eigen::Index room = dim - locked.cols();
    if (room <= 0) {
      done = true;
      break;
    }
    const Eigen::Index K = std::min(kdim, room);

    Vec q;
    if (restart.size() == dim && restart.norm() > 0) {
      q = restart;
    } else {
      q.resize(dim);
      for (Eigen::Index i = 0; i < dim; ++i) q(i) = normal(rng);
    }
    orthogonalize(q, locked, locked.cols());
    if (q.norm() < 1e-12) {
      q.resize(dim);
      for (Eigen::Index i = 0; i < dim; ++i) q(i) = normal(rng);
      orthogonalize(q, locked, locked.cols());
    }
    q.normalize();

    Mat V(dim, K + 1);
    V.col(0) = q;
    Vec alpha = Vec::Zero(K), beta = Vec::Zero(K);
    Eigen::Index steps = 0;
    for (Eigen::Index i = 0; i < K; ++i) {
      Vec w = B.solve(V.col(i));
      alpha(i) = V.col(i).dot(w);
      orthogonalize(w, locked, locked.cols());
      orthogonalize(w, V, i + 1);
      beta(i) = w.norm();
      steps = i + 1;
      if (beta(i) < 1e-14 * std::max(1.0, std::abs(alpha(i)))) break;
      V.col(i + 1) = w / beta(i);
    }

    Eigen::SelfAdjointEigenSolver<Mat> tri;
    Vec diag = alpha.head(steps);
    Vec sub = beta.head(std::max<Eigen::Index>(steps - 1, 0));
    tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    // Ritz values of (A+I)^{-1} in ascending order; largest first below.
    const Vec theta = tri.eigenvalues();
    const Mat S = tri.eigenvectors();

    restart = Vec::Zero(dim);
    bool top_converged = false;
    double top_lambda = 0.0;
    std::size_t wanted_left = locked_values.size() >= m ? 1 : m - locked_values.size() + 1;
    for (Eigen::Index idx = steps - 1; idx >= 0; --idx) {
      if (theta(idx) <= 0) break;
      Vec y = V.leftCols(steps) * S.col(idx);
      y.normalize();
      const Vec Ay = B.apply_A(y);
      const double lambda = y.dot(Ay);
      const double r = (Ay - lambda * y).norm();
      const bool is_top = idx == steps - 1;
      if (r <= tol) {
        orthogonalize(y, locked, locked.cols());
        y.normalize();
        locked.conservativeResize(Eigen::NoChange, locked.cols() + 1);
        locked.col(locked.cols() - 1) = y;
        locked_values.push_back(lambda);
        if (is_top) {
          top_converged = true;
          top_lambda = lambda;
        }
      } else {
        if (wanted_left > 0) restart += y;
        if (is_top) top_lambda = lambda;
      }
      if (wanted_left > 0) --wanted_left;
      // Only Ritz pairs among the wanted end are worth checking.
      if (steps - idx > static_cast<Eigen::Index>(2 * m + 4)) break;
    }

    if (locked_values.size() >= m) {
      const double lm = mth_locked();
      // The complement's top Ritz pair converged above the m-th locked value:
      // nothing smaller is left to find.
      if (top_converged && top_lambda >= lm - tol) done = true;
      // Unconverged top Ritz value clearly above it: the clustered upper
      // spectrum converges slowly and cannot hide anything below lm.
      if (!top_converged && top_lambda > lm + std::max(tol, 1e-3 * std::max(1.0, std::abs(lm)))) done = true;
    }
    if (steps < K && !done && locked.cols() >= dim) done = true;
  }

  std::vector<std::size_t> order(locked_values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return locked_values[a] < locked_values[b]; });
  const std::size_t take = std::min(m, order.size());
  res.functions.resize(dim, static_cast<Eigen::Index>(take));
  for (std::size_t i = 0; i < take; ++i) {
    Vec w = locked.col(static_cast<Eigen::Index>(order[i]));
    const Vec Aw = B.apply_A(w);
    res.values.push_back(locked_values[order[i]]);
    res.residuals.push_back((Aw - locked_values[order[i]] * w).norm());
    Vec f = w.cwiseQuotient(B.sqrt_mass);
    Eigen::Index arg;
    f.cwiseAbs().maxCoeff(&arg);
    if (f(arg) < 0) f = -f;
    res.functions.col(static_cast<Eigen::Index>(i)) = f;
  }
  res.converged = done && take == m;
  res.cg_iterations = B.iterations;
  res.worst_cg_residual = B.worst_error;
  std::ostringstream note;
  if (!res.converged) note << "Lanczos stopped after " << options.max_cycles << " cycles with " << take << " of " << m << " pairs";
  if (B.worst_error > options.cg_tol * 10) {
    if (note.tellp() > 0) note << "; ";
    note << "conjugate gradients reached relative residual " << B.worst_error;
  }
  res.note = note.str();
  return res;
}

}  // namespace charflow
