#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <limits>
#include <numbers>
#include <random>

#include "charflow/errors.hpp"
#include "charflow/torus.hpp"

namespace charflow {

TorusGrid::TorusGrid(std::size_t n, std::size_t N) : n_(n), N_(N) {
  if (n < 1 || n > 3) throw PreconditionError("torus dimension must be 1, 2 or 3");
  if (N < 4 || (N & (N - 1)) != 0) throw PreconditionError("points per axis must be a power of two >= 4");
  total_ = 1;
  for (std::size_t i = 0; i < n; ++i) {
    stride_[i] = total_;
    total_ *= N;
  }
  h_ = 2.0 * std::numbers::pi / static_cast<double>(N);
  cell_ = std::pow(h_, static_cast<double>(n));
}

std::array<std::size_t, 3> TorusGrid::multi_index(std::size_t node) const {
  std::array<std::size_t, 3> m{};
  for (std::size_t i = 0; i < n_; ++i) {
    m[i] = node % N_;
    node /= N_;
  }
  return m;
}

std::size_t TorusGrid::node(const std::array<std::size_t, 3>& multi) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < n_; ++i) idx += (multi[i] % N_) * stride_[i];
  return idx;
}

std::vector<double> TorusGrid::coords(std::size_t node) const {
  const auto m = multi_index(node);
  std::vector<double> x(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = h_ * static_cast<double>(m[i]);
  return x;
}

std::size_t TorusGrid::shift(std::size_t node, std::size_t axis, long step) const {
  const std::size_t i = (node / stride_[axis]) % N_;
  const long N = static_cast<long>(N_);
  const std::size_t j = static_cast<std::size_t>(((static_cast<long>(i) + step) % N + N) % N);
  return node + (j - i) * stride_[axis];
}

double wrap_angle(double x) {
  const double two_pi = 2.0 * std::numbers::pi;
  double y = std::fmod(x, two_pi);
  if (y <= -std::numbers::pi) y += two_pi;
  if (y > std::numbers::pi) y -= two_pi;
  return y;
}

namespace {

std::vector<double> centered(const TorusGrid& grid, std::size_t node) {
  auto x = grid.coords(node);
  for (auto& v : x) v = wrap_angle(v);
  return x;
}

}  // namespace

Eigen::VectorXd sample(const SmoothExpr& expr, const TorusGrid& grid) {
  if (expr.nvars() > grid.dimension()) throw DimensionMismatch("expression has more variables than the torus");
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t p = 0; p < grid.size(); ++p) v(static_cast<Eigen::Index>(p)) = expr.evaluate(centered(grid, p));
  return v;
}

std::vector<char> mask_from_expr(const SmoothExpr& expr, const TorusGrid& grid, double tol) {
  const Eigen::VectorXd v = sample(expr, grid);
  std::vector<char> mask(grid.size(), 0);
  for (std::size_t p = 0; p < grid.size(); ++p) mask[p] = std::abs(v(static_cast<Eigen::Index>(p))) <= tol;
  return mask;
}

std::vector<std::size_t> graph_distance(const std::vector<char>& mask, const TorusGrid& grid) {
  if (mask.size() != grid.size()) throw DimensionMismatch("mask size differs from grid size");
  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> dist(grid.size(), kInf);
  std::deque<std::size_t> queue;
  for (std::size_t p = 0; p < grid.size(); ++p)
    if (mask[p]) {
      dist[p] = 0;
      queue.push_back(p);
    }
  while (!queue.empty()) {
    const std::size_t p = queue.front();
    queue.pop_front();
    for (std::size_t axis = 0; axis < grid.dimension(); ++axis)
      for (long step : {-1L, 1L}) {
        const std::size_t q = grid.shift(p, axis, step);
        if (dist[q] == kInf) {
          dist[q] = dist[p] + 1;
          queue.push_back(q);
        }
      }
  }
  return dist;
}

std::vector<char> dilate(const std::vector<char>& mask, const TorusGrid& grid, double radius) {
  const auto dist = graph_distance(mask, grid);
  const auto cells = static_cast<std::size_t>(std::ceil(radius / grid.spacing() - 1e-9));
  std::vector<char> out(grid.size(), 0);
  for (std::size_t p = 0; p < grid.size(); ++p) out[p] = dist[p] <= cells;
  return out;
}

Eigen::VectorXd band_limited_field(const TorusGrid& grid, std::size_t kmax, std::uint64_t seed) {
  const std::size_t n = grid.dimension(), N = grid.points_per_axis();
  const std::size_t K = 2 * kmax + 1;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  using C = std::complex<double>;

  // Coefficient tensor over K^n modes, transformed one axis at a time.
  std::vector<std::size_t> shape(n, K);
  std::vector<C> data(static_cast<std::size_t>(std::pow(K, n)));
  for (auto& c : data) c = C(normal(rng), normal(rng));

  for (std::size_t axis = 0; axis < n; ++axis) {
    std::vector<std::size_t> next_shape = shape;
    next_shape[axis] = N;
    std::size_t inner = 1, outer = 1;
    for (std::size_t i = 0; i < axis; ++i) inner *= shape[i];
    for (std::size_t i = axis + 1; i < n; ++i) outer *= shape[i];
    std::vector<C> next(inner * N * outer, C(0.0, 0.0));
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t x = 0; x < N; ++x)
        for (std::size_t k = 0; k < K; ++k) {
          const double freq = static_cast<double>(k) - static_cast<double>(kmax);
          const C phase = std::polar(1.0, freq * grid.spacing() * static_cast<double>(x));
          for (std::size_t i = 0; i < inner; ++i)
            next[i + inner * (x + N * o)] += data[i + inner * (k + K * o)] * phase;
        }
    data = std::move(next);
    shape = next_shape;
  }
  Eigen::VectorXd f(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t p = 0; p < grid.size(); ++p) f(static_cast<Eigen::Index>(p)) = data[p].real();
  return f;
}

}  // namespace charflow
