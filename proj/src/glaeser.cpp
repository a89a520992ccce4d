#include "charflow/glaeser.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <tuple>

#include "charflow/errors.hpp"

namespace charflow {

namespace {

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

/// Flips v so that its largest-magnitude component is positive.
Eigen::VectorXd canonical_sign(Eigen::VectorXd v) {
  Eigen::Index k = 0;
  v.cwiseAbs().maxCoeff(&k);
  if (v(k) < 0) v = -v;
  return v;
}

/// Greedy clustering of lines (v ~ -v) by angle; representatives are the
/// normalized sign-aligned means.
std::vector<Eigen::VectorXd> cluster_lines(const std::vector<Eigen::VectorXd>& vs, double theta) {
  const double cos_tol = std::cos(theta);
  std::vector<Eigen::VectorXd> sums, reps;
  for (const auto& v : vs) {
    bool placed = false;
    for (std::size_t c = 0; c < reps.size() && !placed; ++c) {
      const double d = reps[c].dot(v);
      if (std::abs(d) >= cos_tol) {
        sums[c] += d < 0 ? Eigen::VectorXd(-v) : v;
        reps[c] = sums[c].normalized();
        placed = true;
      }
    }
    if (!placed) {
      sums.push_back(v);
      reps.push_back(v);
    }
  }
  for (auto& r : reps) r = canonical_sign(r);
  return reps;
}

/// Left singular vectors of the column stack with sigma >= sigma_max / gap.
Eigen::MatrixXd span_basis(const std::vector<Eigen::VectorXd>& vs, std::size_t n, double gap) {
  if (vs.empty()) return Eigen::MatrixXd(static_cast<Eigen::Index>(n), 0);
  Eigen::MatrixXd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(vs.size()));
  for (std::size_t i = 0; i < vs.size(); ++i) A.col(static_cast<Eigen::Index>(i)) = vs[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > 0 && s(rank) >= s(0) / gap) ++rank;
  Eigen::MatrixXd U = svd.matrixU().leftCols(rank);
  for (Eigen::Index c = 0; c < U.cols(); ++c) U.col(c) = canonical_sign(U.col(c));
  return U;
}

std::vector<Eigen::VectorXd> columns(const Eigen::MatrixXd& B) {
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index c = 0; c < B.cols(); ++c) out.push_back(B.col(c));
  return out;
}

void check_scale_factor(const GlaeserOptions& o) {
  if (o.r_outer_factor < 4.0) throw PreconditionError("r_outer must be at least 4 * scale");
  if (o.pairs_cap == 0) throw PreconditionError("pairs_cap must be positive");
  if (!(o.theta_tol_deg > 0) || !(o.closure_factor > 0) || !(o.rank_gap > 1))
    throw PreconditionError("glaeser tolerances must be positive");
}

}  // namespace

PointCloud::PointCloud(std::size_t dimension, std::vector<std::vector<double>> points, double scale, CloudMetric metric)
    : n_(dimension), points_(std::move(points)), scale_(scale), metric_(metric) {
  if (n_ == 0) throw DimensionMismatch("point cloud dimension must be positive");
  if (!(scale_ > 0)) throw PreconditionError("point cloud scale must be positive");
  for (const auto& p : points_)
    if (p.size() != n_) throw DimensionMismatch("point has the wrong number of coordinates");
  std::vector<std::size_t> order(points_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points_[a] < points_[b]; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (points_[order[i]] == points_[order[i - 1]]) throw PreconditionError("point cloud contains duplicate points");
}

Eigen::VectorXd PointCloud::displacement(std::size_t i, std::size_t j) const {
  const auto& p = points_.at(i);
  const auto& q = points_.at(j);
  Eigen::VectorXd d(static_cast<Eigen::Index>(n_));
  for (std::size_t k = 0; k < n_; ++k) {
    const double v = q[k] - p[k];
    d(static_cast<Eigen::Index>(k)) = metric_ == CloudMetric::Torus ? wrap_angle(v) : v;
  }
  return d;
}

double PointCloud::distance(std::size_t i, std::size_t j) const { return displacement(i, j).norm(); }

std::vector<std::size_t> PointCloud::ball(std::size_t i, double r) const {
  std::vector<std::pair<double, std::size_t>> hits;
  for (std::size_t j = 0; j < points_.size(); ++j) {
    const double d = distance(i, j);
    if (d <= r) hits.emplace_back(d, j);
  }
  std::sort(hits.begin(), hits.end());
  std::vector<std::size_t> out;
  out.reserve(hits.size());
  for (auto& h : hits) out.push_back(h.second);
  return out;
}

PointCloud PointCloud::subset(const std::vector<std::size_t>& indices) const {
  std::vector<std::vector<double>> pts;
  pts.reserve(indices.size());
  for (auto i : indices) pts.push_back(points_.at(i));
  return PointCloud(n_, std::move(pts), scale_, metric_);
}

std::vector<double> PointCloud::chart(std::size_t i) const {
  auto x = points_.at(i);
  if (metric_ == CloudMetric::Torus)
    for (auto& v : x) v = wrap_angle(v);
  return x;
}

PointCloud cloud_from_zero_set(const SmoothExpr& expr, const TorusGrid& grid, double tol) {
  const auto mask = mask_from_expr(expr, grid, tol);
  std::vector<std::vector<double>> pts;
  for (std::size_t p = 0; p < grid.size(); ++p)
    if (mask[p]) pts.push_back(grid.coords(p));
  return PointCloud(grid.dimension(), std::move(pts), grid.spacing(), CloudMetric::Torus);
}

std::vector<Eigen::VectorXd> paratangent_cone(const PointCloud& cloud, std::size_t x, double r_outer,
                                              std::size_t pairs_cap, double theta_tol_deg) {
  if (x >= cloud.size()) throw PreconditionError("base point is not in the cloud");
  if (r_outer < 4.0 * cloud.scale() * (1 - 1e-12)) throw PreconditionError("r_outer must be at least 4 * scale");
  const auto ball = cloud.ball(x, r_outer);
  if (ball.size() < 2) return {};

  std::vector<double> d(ball.size());
  for (std::size_t a = 0; a < ball.size(); ++a) d[a] = cloud.distance(x, ball[a]);
  using Key = std::tuple<double, double, std::size_t, std::size_t>;
  std::vector<Key> pairs;
  pairs.reserve(ball.size() * (ball.size() - 1) / 2);
  for (std::size_t a = 0; a < ball.size(); ++a)
    for (std::size_t b = a + 1; b < ball.size(); ++b) pairs.emplace_back(d[a] + d[b], std::min(d[a], d[b]), a, b);
  const std::size_t take = std::min(pairs_cap, pairs.size());
  std::partial_sort(pairs.begin(), pairs.begin() + static_cast<std::ptrdiff_t>(take), pairs.end());

  std::vector<Eigen::VectorXd> secants;
  for (std::size_t i = 0; i < take; ++i) {
    const auto [s, m, a, b] = pairs[i];
    Eigen::VectorXd v = cloud.displacement(ball[a], ball[b]);
    const double len = v.norm();
    if (len > 0) secants.push_back(canonical_sign(v / len));
  }
  std::vector<Eigen::VectorXd> out;
  for (auto& r : cluster_lines(secants, deg2rad(theta_tol_deg))) {
    out.push_back(r);
    out.push_back(-r);
  }
  return out;
}

ConeField paratangent_field(const PointCloud& cloud, const GlaeserOptions& options) {
  check_scale_factor(options);
  ConeField field;
  field.fibers.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    field.fibers[i].directions =
        paratangent_cone(cloud, i, options.r_outer_factor * cloud.scale(), options.pairs_cap, options.theta_tol_deg);
    field.fibers[i].basis = Eigen::MatrixXd(static_cast<Eigen::Index>(cloud.dimension()), 0);
  }
  return field;
}

ConeField linearize(const ConeField& field, const GlaeserOptions& options) {
  ConeField out;
  out.linearized = true;
  out.fibers.reserve(field.fibers.size());
  for (const auto& f : field.fibers) {
    const auto n = static_cast<std::size_t>(f.basis.rows());
    std::vector<Eigen::VectorXd> lines;
    for (const auto& v : f.directions) lines.push_back(canonical_sign(v));
    for (const auto& v : columns(f.basis)) lines.push_back(canonical_sign(v));
    Fiber g;
    g.basis = span_basis(cluster_lines(lines, deg2rad(options.theta_tol_deg)), n, options.rank_gap);
    g.directions = columns(g.basis);
    out.fibers.push_back(std::move(g));
  }
  return out;
}

ConeField lambda_op(const ConeField& field, const PointCloud& cloud, const GlaeserOptions& options) {
  check_scale_factor(options);
  if (field.fibers.size() != cloud.size()) throw DimensionMismatch("cone field and cloud differ in size");
  const ConeField base = field.linearized ? field : linearize(field, options);
  const double r = options.closure_factor * cloud.scale();
  const double sin_tol = std::sin(deg2rad(options.theta_tol_deg));
  const auto n = static_cast<Eigen::Index>(cloud.dimension());

  ConeField out;
  out.linearized = true;
  out.fibers.resize(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::MatrixXd& Q = base.fibers[i].basis;
    std::vector<Eigen::VectorXd> residuals;
    if (Q.cols() < n) {
      for (std::size_t j : cloud.ball(i, r)) {
        if (j == i) continue;
        for (const auto& v : columns(base.fibers[j].basis)) {
          Eigen::VectorXd res = Q.cols() ? Eigen::VectorXd(v - Q * (Q.transpose() * v)) : v;
          const double len = res.norm();
          if (len > sin_tol) residuals.push_back(canonical_sign(res / len));
        }
      }
    }
    Fiber g;
    if (residuals.empty()) {
      g.basis = Q;
    } else {
      const Eigen::MatrixXd extra =
          span_basis(cluster_lines(residuals, deg2rad(options.theta_tol_deg)), static_cast<std::size_t>(n),
                     options.rank_gap);
      Eigen::MatrixXd stacked(n, Q.cols() + extra.cols());
      stacked << Q, extra;
      // Re-orthonormalize; Q's columns come first so its span is kept.
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(stacked);
      const Eigen::Index k = std::min<Eigen::Index>(stacked.cols(), n);
      Eigen::MatrixXd B = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
      if (Q.cols() > 0) B.leftCols(Q.cols()) = Q;
      for (Eigen::Index c = Q.cols(); c < k; ++c) {
        Eigen::VectorXd v = B.col(c);
        for (Eigen::Index e = 0; e < c; ++e) v -= B.col(e).dot(v) * B.col(e);
        B.col(c) = canonical_sign(v.normalized());
      }
      g.basis = B;
    }
    g.directions = columns(g.basis);
    out.fibers[i] = std::move(g);
  }
  return out;
}

ConeField zariski_tangent_estimate(const PointCloud& cloud, const GlaeserOptions& options) {
  ConeField B = linearize(paratangent_field(cloud, options), options);
  for (std::size_t it = 0; it < 2 * cloud.dimension(); ++it) B = lambda_op(B, cloud, options);
  return B;
}

double subspace_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) return std::numbers::pi / 2;
  if (a.cols() == 0) return 0.0;
  // sin of the largest principal angle is the norm of b's component off span(a).
  const Eigen::MatrixXd off = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(off);
  return std::asin(std::clamp(svd.singularValues()(0), 0.0, 1.0));
}

std::size_t NumericChainStep::characteristic_count() const {
  return static_cast<std::size_t>(std::count(characteristic.begin(), characteristic.end(), 1));
}

std::vector<char> classify_characteristic(const SmoothFieldSystem& fields, const PointCloud& cloud,
                                          const ConeField& tangent, double theta_char_deg, double v_floor) {
  if (fields.dimension() != cloud.dimension()) throw DimensionMismatch("fields and cloud differ in dimension");
  if (tangent.fibers.size() != cloud.size()) throw DimensionMismatch("tangent field and cloud differ in size");
  const double sin_char = std::sin(deg2rad(theta_char_deg));
  std::vector<char> out(cloud.size(), 1);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::MatrixXd& Q = tangent.fibers[i].basis;
    const auto x = cloud.chart(i);
    for (const auto& X : fields.fields) {
      const auto val = X.evaluate(x);
      const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(val.data(), static_cast<Eigen::Index>(val.size()));
      const double nv = v.norm();
      if (nv < v_floor || nv == 0.0) continue;
      const double off = Q.cols() ? (v - Q * (Q.transpose() * v)).norm() : nv;
      if (off > sin_char * nv) {
        out[i] = 0;
        break;
      }
    }
  }
  return out;
}

NumericChain numeric_char_chain(const SmoothFieldSystem& fields, const PointCloud& A0,
                                const NumericChainOptions& options) {
  if (fields.dimension() != A0.dimension()) throw DimensionMismatch("fields and cloud differ in dimension");
  if (!(options.theta_char_deg > 0) || !(options.floor_rel >= 0))
    throw PreconditionError("characteristic tolerances must be positive");
  const std::size_t max_k = options.max_k ? options.max_k : A0.dimension() + 1;

  NumericChain chain;
  for (std::size_t i = 0; i < A0.size(); ++i) {
    const auto x = A0.chart(i);
    for (const auto& X : fields.fields) {
      const auto v = X.evaluate(x);
      double s = 0.0;
      for (double c : v) s += c * c;
      chain.v_floor = std::max(chain.v_floor, std::sqrt(s));
    }
  }
  chain.v_floor *= options.floor_rel;

  PointCloud cur = A0;
  std::vector<std::size_t> source(A0.size());
  std::iota(source.begin(), source.end(), 0);
  for (std::size_t k = 0;; ++k) {
    NumericChainStep step{k, cur, source, {}, {}};
    if (cur.empty()) {
      chain.steps.push_back(std::move(step));
      chain.emptied = true;
      chain.stop_reason = "empty";
      break;
    }
    const ConeField T = zariski_tangent_estimate(cur, options.glaeser);
    step.characteristic = classify_characteristic(fields, cur, T, options.theta_char_deg, chain.v_floor);
    for (const auto& f : T.fibers) step.tangent_dim.push_back(f.dim());

    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < cur.size(); ++i)
      if (step.characteristic[i]) keep.push_back(i);
    chain.steps.push_back(step);
    if (keep.size() == cur.size()) {
      chain.stabilized = true;
      chain.stop_reason = "stable";
      break;
    }
    if (k + 1 > max_k && !keep.empty()) {
      chain.stop_reason = "reached max_k";
      break;
    }
    std::vector<std::size_t> next_source;
    for (auto i : keep) next_source.push_back(source[i]);
    cur = cur.subset(keep);
    source = std::move(next_source);
  }
  return chain;
}

}  // namespace charflow
