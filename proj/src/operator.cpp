#include <cmath>

#include "charflow/errors.hpp"
#include "charflow/torus.hpp"

namespace charflow {

namespace {

std::vector<double> centered_coords(const TorusGrid& grid, std::size_t node) {
  auto x = grid.coords(node);
  for (auto& v : x) v = wrap_angle(v);
  return x;
}

}  // namespace

SparseSymOperator::SparseSymOperator(const SmoothFieldSystem& fields, const TorusGrid& grid,
                                     const std::optional<SmoothExpr>& density)
    : grid_(grid), r_(fields.fields.size()) {
  const std::size_t n = grid.dimension();
  const auto total = static_cast<Eigen::Index>(grid.size());
  if (fields.dimension() != n) throw DimensionMismatch("field system dimension differs from torus dimension");
  if (r_ == 0) throw PreconditionError("at least one field is required");
  const double h = grid.spacing();

  coeff_.assign(r_ * n, Eigen::VectorXd::Zero(total));
  mass_.resize(total);
  for (std::size_t p = 0; p < grid.size(); ++p) {
    const auto x = centered_coords(grid, p);
    const auto ip = static_cast<Eigen::Index>(p);
    for (std::size_t j = 0; j < r_; ++j) {
      if (fields.fields[j].dimension() != n) throw DimensionMismatch("field has the wrong number of components");
      for (std::size_t k = 0; k < n; ++k) coeff_[j * n + k](ip) = fields.fields[j].coeffs[k].evaluate(x) / h;
    }
    const double rho = density ? density->evaluate(x) : 1.0;
    if (!(rho > 0.0)) throw PreconditionError("density must be positive on the grid");
    mass_(ip) = rho * grid.cell_volume();
  }

  Eigen::SparseMatrix<double> P(total, total);
  for (std::size_t j = 0; j < r_; ++j)
    for (bool forward : {true, false}) {
      std::vector<Eigen::Triplet<double>> trip;
      trip.reserve(grid.size() * (n + 1));
      for (std::size_t p = 0; p < grid.size(); ++p) {
        const auto ip = static_cast<Eigen::Index>(p);
        double diag = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double c = coeff_[j * n + k](ip);
          if (c == 0.0) continue;
          const auto q = static_cast<Eigen::Index>(grid.shift(p, k, forward ? 1 : -1));
          // forward: c (f(p+e) - f(p)); backward: c (f(p) - f(p-e))
          trip.emplace_back(ip, q, forward ? c : -c);
          diag += forward ? -c : c;
        }
        if (diag != 0.0) trip.emplace_back(ip, ip, diag);
      }
      Eigen::SparseMatrix<double> D(total, total);
      D.setFromTriplets(trip.begin(), trip.end());
      Eigen::SparseMatrix<double> RD = mass_.asDiagonal() * D;
      Eigen::SparseMatrix<double> term = D.transpose() * RD;
      P += 0.5 * term;
    }
  Eigen::SparseMatrix<double> Pt = P.transpose();
  P_ = 0.5 * (P + Pt);
  P_.prune(0.0);
  P_.makeCompressed();
  assembled_as_ = "1/2 sum_j (D+_j^T R D+_j + D-_j^T R D-_j), R = diag(rho h^n)";
}

Eigen::VectorXd SparseSymOperator::difference(std::size_t j, bool forward, const Eigen::VectorXd& f) const {
  const std::size_t n = grid_.dimension();
  if (j >= r_) throw PreconditionError("field index out of range");
  if (static_cast<std::size_t>(f.size()) != grid_.size()) throw DimensionMismatch("grid function has the wrong size");
  Eigen::VectorXd d = Eigen::VectorXd::Zero(f.size());
  for (std::size_t p = 0; p < grid_.size(); ++p) {
    const auto ip = static_cast<Eigen::Index>(p);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double c = coeff_[j * n + k](ip);
      if (c == 0.0) continue;
      const auto q = static_cast<Eigen::Index>(grid_.shift(p, k, forward ? 1 : -1));
      acc += c * (forward ? f(q) - f(ip) : f(ip) - f(q));
    }
    d(ip) = acc;
  }
  return d;
}

Eigen::VectorXd SparseSymOperator::apply(const Eigen::VectorXd& f) const {
  const std::size_t n = grid_.dimension();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(f.size());
  for (std::size_t j = 0; j < r_; ++j)
    for (bool forward : {true, false}) {
      const Eigen::VectorXd w = 0.5 * mass_.cwiseProduct(difference(j, forward, f));
      // Transpose of the stencil: scatter w(p) * c back to the two nodes.
      for (std::size_t p = 0; p < grid_.size(); ++p) {
        const auto ip = static_cast<Eigen::Index>(p);
        if (w(ip) == 0.0) continue;
        for (std::size_t k = 0; k < n; ++k) {
          const double c = coeff_[j * n + k](ip);
          if (c == 0.0) continue;
          const auto q = static_cast<Eigen::Index>(grid_.shift(p, k, forward ? 1 : -1));
          if (forward) {
            out(q) += c * w(ip);
            out(ip) -= c * w(ip);
          } else {
            out(ip) += c * w(ip);
            out(q) -= c * w(ip);
          }
        }
      }
    }
  return out;
}

double SparseSymOperator::energy(const Eigen::VectorXd& f) const {
  double e = 0.0;
  for (std::size_t j = 0; j < r_; ++j)
    for (bool forward : {true, false}) {
      const Eigen::VectorXd d = difference(j, forward, f);
      e += 0.5 * mass_.dot(d.cwiseProduct(d));
    }
  return e;
}

double SparseSymOperator::mass_norm_sq(const Eigen::VectorXd& f) const { return mass_.dot(f.cwiseProduct(f)); }

double SparseSymOperator::normalized_inf_norm() const {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(mass_.size());
  for (Eigen::Index c = 0; c < P_.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(P_, c); it; ++it)
      rows(it.row()) += std::abs(it.value()) / std::sqrt(mass_(it.row()) * mass_(it.col()));
  return rows.size() ? rows.maxCoeff() : 0.0;
}

SparseSymOperator assemble_operator(const SmoothFieldSystem& fields, const TorusGrid& grid,
                                    const std::optional<SmoothExpr>& density) {
  return SparseSymOperator(fields, grid, density);
}

}  // namespace charflow
