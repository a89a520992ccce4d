#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "charflow/errors.hpp"
#include "charflow/torus.hpp"

using namespace charflow;

namespace {

const double kPi = std::numbers::pi;

SmoothFieldSystem sys2(std::vector<std::vector<std::string>> c) { return parse_smooth_system({"x", "y"}, c); }
SmoothFieldSystem grushin() { return sys2({{"1", "0"}, {"0", "sin(x)"}}); }

Eigen::VectorXd random_vec(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = g(rng);
  return v;
}

// Independent quadrature of the energy: X_j f by one-sided differences in
// both directions, weighted by rho h^n, averaged.
double quadrature_energy(const SmoothFieldSystem& sys, const TorusGrid& grid, const Eigen::VectorXd& f,
                         const std::optional<SmoothExpr>& rho = std::nullopt) {
  const std::size_t n = grid.dimension();
  const double h = grid.spacing();
  double total = 0.0;
  for (std::size_t p = 0; p < grid.size(); ++p) {
    auto x = grid.coords(p);
    for (auto& v : x) v = wrap_angle(v);
    const double w = (rho ? rho->evaluate(x) : 1.0) * std::pow(h, double(n));
    for (const auto& X : sys.fields) {
      const auto b = X.evaluate(x);
      double fwd = 0.0, bwd = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const auto ip = static_cast<Eigen::Index>(p);
        fwd += b[k] * (f(static_cast<Eigen::Index>(grid.shift(p, k, 1))) - f(ip)) / h;
        bwd += b[k] * (f(ip) - f(static_cast<Eigen::Index>(grid.shift(p, k, -1)))) / h;
      }
      total += 0.5 * w * (fwd * fwd + bwd * bwd);
    }
  }
  return total;
}

// Dense generalized eigenvalues of (P, M), ascending.
Eigen::VectorXd dense_eigs(const SparseSymOperator& P) {
  const Eigen::MatrixXd A = Eigen::MatrixXd(P.matrix());
  const Eigen::MatrixXd M = P.mass().asDiagonal();
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, M);
  return es.eigenvalues();
}

}  // namespace

TEST_CASE("grid indexing and wrap") {
  TorusGrid g(3, 8);
  CHECK(g.size() == 512);
  CHECK(g.spacing() == doctest::Approx(2 * kPi / 8));
  CHECK(g.cell_volume() == doctest::Approx(std::pow(2 * kPi / 8, 3)));
  for (std::size_t p = 0; p < g.size(); p += 37) CHECK(g.node(g.multi_index(p)) == p);
  CHECK(g.multi_index(1) == std::array<std::size_t, 3>{1, 0, 0});
  CHECK(g.multi_index(8) == std::array<std::size_t, 3>{0, 1, 0});
  CHECK(g.shift(0, 0, -1) == 7);
  CHECK(g.shift(7, 0, 1) == 0);
  CHECK(g.shift(g.node({0, 0, 7}), 2, 1) == 0);
  CHECK(g.coords(g.node({3, 0, 5}))[2] == doctest::Approx(5 * g.spacing()));
  CHECK_THROWS_AS(TorusGrid(4, 8), PreconditionError);
  CHECK_THROWS_AS(TorusGrid(2, 12), PreconditionError);
  CHECK_THROWS_AS(TorusGrid(2, 2), PreconditionError);

  CHECK(wrap_angle(kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_angle(3 * kPi / 2) == doctest::Approx(-kPi / 2));
  CHECK(wrap_angle(0.25) == 0.25);
}

TEST_CASE("1-D N=8 operator is the periodic second difference") {
  TorusGrid g(1, 8);
  auto P = assemble_operator(parse_smooth_system({"x"}, {{"1"}}), g);
  const double h = g.spacing();
  const Eigen::MatrixXd A(P.matrix());
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) {
      const int d = std::abs(i - j);
      const double want = i == j ? 2.0 / h : (d == 1 || d == 7) ? -1.0 / h : 0.0;
      CHECK(A(i, j) == doctest::Approx(want).epsilon(1e-13));
    }
  auto ev = dense_eigs(P);
  std::vector<double> want;
  for (int k = 0; k < 8; ++k) want.push_back((2 - 2 * std::cos(2 * kPi * k / 8)) / (h * h));
  std::sort(want.begin(), want.end());
  for (int k = 0; k < 8; ++k) CHECK(ev(k) == doctest::Approx(want[k]).epsilon(1e-12).scale(1));
}

TEST_CASE("structural invariants") {
  std::vector<std::pair<SmoothFieldSystem, std::size_t>> cases;
  cases.push_back({grushin(), 2});
  cases.push_back({sys2({{"flat2(y)", "0"}, {"1", "flat2(x)*sin(y)"}}), 2});
  cases.push_back({parse_smooth_system({"a", "b", "c"}, {{"1", "0", "0"}, {"0", "flatabs(sin(a))", "0"}, {"0", "0", "1"}}), 3});
  for (auto& [sys, n] : cases) {
    TorusGrid g(n, n == 3 ? 8 : 16);
    auto P = assemble_operator(sys, g);
    const auto& A = P.matrix();
    // exact symmetry
    const Eigen::SparseMatrix<double> T = A.transpose();
    CHECK((A - T).norm() == 0.0);
    for (int k = 0; k < A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it) CHECK(it.value() == T.coeff(it.row(), it.col()));
    // constants in the kernel, exactly
    const Eigen::VectorXd ones = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.size()), 3.25);
    CHECK(P.apply(ones).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t j = 0; j < sys.fields.size(); ++j) {
      CHECK(P.difference(j, true, ones).cwiseAbs().maxCoeff() == 0.0);
      CHECK(P.difference(j, false, ones).cwiseAbs().maxCoeff() == 0.0);
    }
    // quadratic form identity, matrix vs stencils vs independent quadrature
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Eigen::VectorXd f = random_vec(g.size(), 100 + s);
      const double q = f.dot(A * f);
      CHECK(q >= 0.0);
      CHECK(q == doctest::Approx(P.energy(f)).epsilon(1e-10));
      CHECK(q == doctest::Approx(quadrature_energy(sys, g, f)).epsilon(1e-10));
      CHECK((P.apply(f) - A * f).norm() <= 1e-10 * (A * f).norm());
    }
    CHECK(P.assembled_as().find("D") != std::string::npos);
  }
}

TEST_CASE("Grushin N=32 energy matches direct quadrature") {
  TorusGrid g(2, 32);
  auto sys = grushin();
  auto P = assemble_operator(sys, g);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Eigen::VectorXd f = random_vec(g.size(), s);
    CHECK(f.dot(P.matrix() * f) == doctest::Approx(quadrature_energy(sys, g, f)).epsilon(1e-10));
  }
  auto rho = SmoothExpr::parse("2 + cos(x)*sin(y)", {"x", "y"});
  auto Pr = assemble_operator(sys, g, rho);
  const Eigen::VectorXd f = random_vec(g.size(), 99);
  CHECK(f.dot(Pr.matrix() * f) == doctest::Approx(quadrature_energy(sys, g, f, rho)).epsilon(1e-10));
}

TEST_CASE("assembly errors") {
  TorusGrid g(2, 8);
  CHECK_THROWS_AS(assemble_operator(sys2({{"1/sin(x)", "0"}}), g), EvalError);
  CHECK_NOTHROW(assemble_operator(sys2({{"flat2(1/sin(x))", "0"}}), g));
  CHECK_THROWS_AS(assemble_operator(grushin(), g, SmoothExpr::parse("sin(x)", {"x", "y"})), PreconditionError);
  CHECK_THROWS_AS(assemble_operator(grushin(), g, SmoothExpr::parse("-1", {"x", "y"})), PreconditionError);
  CHECK_THROWS_AS(assemble_operator(grushin(), TorusGrid(3, 8)), DimensionMismatch);
}

TEST_CASE("smallest_eigs against a dense oracle") {
  TorusGrid g(2, 16);
  for (auto sys : {grushin(), sys2({{"sin(y)", "0"}, {"0", "sin(y)"}})}) {
    auto P = assemble_operator(sys, g, SmoothExpr::parse("1.5 + 0.5*cos(x)", {"x", "y"}));
    const auto want = dense_eigs(P);
    const auto r = smallest_eigs(P, 8);
    REQUIRE(r.values.size() == 8);
    CHECK(r.converged);
    for (int i = 0; i < 8; ++i) {
      CHECK(r.values[i] == doctest::Approx(want(i)).epsilon(1e-8).scale(1));
      CHECK(r.values[i] >= -1e-9);
      if (i > 0) CHECK(r.values[i] >= r.values[i - 1]);
    }
    // M-orthonormal eigenfunctions with small residuals
    const Eigen::MatrixXd G = r.functions.transpose() * P.mass().asDiagonal() * r.functions;
    CHECK((G - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() <= 1e-8);
    for (int i = 0; i < 8; ++i) {
      const Eigen::VectorXd f = r.functions.col(i);
      const Eigen::VectorXd res = P.matrix() * f - r.values[i] * P.mass().cwiseProduct(f);
      CHECK(res.cwiseQuotient(P.mass().cwiseSqrt()).norm() <= 1e-7 * P.normalized_inf_norm());
      CHECK(r.residuals[i] <= 1e-7 * r.operator_norm);
    }
  }
}

TEST_CASE("m = 1 gives the constant kernel vector") {
  TorusGrid g(2, 16);
  auto P = assemble_operator(grushin(), g);
  auto r = smallest_eigs(P, 1);
  REQUIRE(r.values.size() == 1);
  CHECK(std::abs(r.values[0]) <= 1e-9);
  const Eigen::VectorXd f = r.functions.col(0);
  CHECK((f.array() - f(0)).abs().maxCoeff() <= 1e-8 * std::abs(f(0)));
  CHECK_THROWS_AS(smallest_eigs(P, 0), PreconditionError);
  CHECK_THROWS_AS(smallest_eigs(P, 51), PreconditionError);
}

TEST_CASE("volume form scaling leaves the spectrum unchanged") {
  TorusGrid g(2, 16);
  const std::vector<std::string> v{"x", "y"};
  auto P1 = assemble_operator(grushin(), g, SmoothExpr::parse("2 + sin(x+y)", v));
  auto P2 = assemble_operator(grushin(), g, SmoothExpr::parse("7*(2 + sin(x+y))", v));
  auto a = smallest_eigs(P1, 6), b = smallest_eigs(P2, 6);
  const auto da = dense_eigs(P1), db = dense_eigs(P2);
  for (int i = 0; i < 6; ++i) {
    CHECK(da(i) == doctest::Approx(db(i)).epsilon(1e-9).scale(1));
    CHECK(a.values[i] == doctest::Approx(b.values[i]).epsilon(1e-9).scale(1e-7));
  }
}

TEST_CASE("1-D circle spectrum and refinement order") {
  const std::vector<double> k2{0, 1, 1, 4, 4, 9, 9};
  std::vector<std::vector<double>> err;
  for (std::size_t N : {32u, 64u, 128u}) {
    auto P = assemble_operator(parse_smooth_system({"x"}, {{"1"}}), TorusGrid(1, N));
    auto r = smallest_eigs(P, 7);
    std::vector<double> e;
    for (int i = 0; i < 7; ++i) {
      if (k2[i] > 0) e.push_back(std::abs(r.values[i] - k2[i]) / k2[i]);
      // closed-form discrete Fourier eigenvalues
      const double h = 2 * kPi / double(N);
      const double kk = std::sqrt(k2[i]);
      CHECK(r.values[i] == doctest::Approx((2 - 2 * std::cos(kk * h)) / (h * h)).epsilon(1e-9).scale(1));
    }
    if (N == 64)
      for (double x : e) CHECK(x <= 0.02);
    err.push_back(e);
  }
  for (std::size_t i = 0; i < err[0].size(); ++i) {
    CHECK(std::log2(err[0][i] / err[1][i]) >= 1.8);
    CHECK(std::log2(err[1][i] / err[2][i]) >= 1.8);
  }
}

TEST_CASE("spectral_report") {
  SpectrumJob job;
  job.fields = sys2({{"flat2(y)", "0"}, {"1", "flat2(x)*sin(y)"}});
  job.resolutions = {16, 32};
  job.m = 4;
  job.marked = SmoothExpr::parse("y", {"x", "y"});
  auto r = spectral_report(job);
  REQUIRE(r.entries.size() == 2);
  for (const auto& e : r.entries) {
    CHECK(e.eigenvalues.size() == 4);
    CHECK(e.localization.size() == 4);
    CHECK(e.eigenvalues[0] == doctest::Approx(0).scale(1e-9));
    for (double l : e.localization) CHECK((l >= 0.0 && l <= 1.0 + 1e-12));
  }
  CHECK_FALSE(r.warnings.empty());
  job.resolutions.clear();
  CHECK_THROWS_AS(spectral_report(job), PreconditionError);
}

TEST_CASE("masks, distances and dilation") {
  TorusGrid g(2, 16);
  auto A = mask_from_expr(SmoothExpr::parse("x", {"x", "y"}), g, 1e-9);
  std::size_t count = 0;
  for (char c : A) count += c != 0;
  CHECK(count == 16);
  auto d = graph_distance(A, g);
  CHECK(d[g.node({0, 5, 0})] == 0);
  CHECK(d[g.node({3, 5, 0})] == 3);
  CHECK(d[g.node({15, 5, 0})] == 1);
  CHECK(d[g.node({8, 0, 0})] == 8);
  auto U = dilate(A, g, 2.0 * g.spacing());
  count = 0;
  for (char c : U) count += c != 0;
  CHECK(count == 16 * 5);
  auto U2 = dilate(A, g, 1.5 * g.spacing());
  CHECK(U2 == U);
  std::vector<char> none(g.size(), 0);
  CHECK(graph_distance(none, g)[0] == SIZE_MAX);
}

TEST_CASE("band-limited fields") {
  TorusGrid g(1, 32);
  auto f = band_limited_field(g, 4, 11);
  CHECK(f == band_limited_field(g, 4, 11));
  CHECK(f != band_limited_field(g, 4, 12));
  for (int k = 0; k < 32; ++k) {
    std::complex<double> c = 0;
    for (int p = 0; p < 32; ++p) c += f(p) * std::polar(1.0, -2 * kPi * k * p / 32);
    const int kk = std::min(k, 32 - k);
    if (kk > 4) CHECK(std::abs(c) <= 1e-10 * f.norm());
  }
  TorusGrid g2(2, 16);
  auto f2 = band_limited_field(g2, 2, 5);
  CHECK(f2.size() == 256);
  CHECK(f2.norm() > 0);
}

TEST_CASE("Weierstrass scaling") {
  SUBCASE("t = 1 is the unscaled bump") {
    TorusGrid g(2, 64);
    auto sys = sys2({{"1", "0"}, {"0", "sin(x)*sin(y)"}});
    auto P = assemble_operator(sys, g);
    auto rows = weierstrass_scaling_test(P, {1}, {1.0});
    Eigen::VectorXd eta(static_cast<Eigen::Index>(g.size()));
    double l2 = 0.0;
    for (std::size_t p = 0; p < g.size(); ++p) {
      auto x = g.coords(p);
      double v = 1.0;
      for (double xi : x) {
        const double u = wrap_angle(xi) / (kPi / 2);
        v *= std::abs(u) < 1 ? std::exp(-1 / (1 - u * u)) : 0.0;
      }
      eta(static_cast<Eigen::Index>(p)) = v;
      l2 += v * v * g.cell_volume();
    }
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].l2_norm_sq == doctest::Approx(l2).epsilon(1e-12));
    CHECK(rows[0].energy == doctest::Approx(quadrature_energy(sys, g, eta)).epsilon(1e-10));
  }
  SUBCASE("characteristic slice keeps energy bounded") {
    TorusGrid g(2, 256);
    auto P = assemble_operator(sys2({{"1", "0"}, {"0", "sin(x)*sin(y)"}}), g);
    auto rows = weierstrass_scaling_test(P, {1}, {4, 8, 16});
    double emin = 1e300, emax = 0, lmin = 1e300, lmax = 0;
    for (auto& r : rows) {
      emin = std::min(emin, r.energy), emax = std::max(emax, r.energy);
      lmin = std::min(lmin, r.l2_norm_sq), lmax = std::max(lmax, r.l2_norm_sq);
    }
    CHECK(emax / emin <= 2.0);
    CHECK(lmax / lmin <= 1.1);
  }
  SUBCASE("elliptic fields grow like t^2") {
    TorusGrid g(2, 256);
    auto P = assemble_operator(sys2({{"1", "0"}, {"0", "1"}}), g);
    auto rows = weierstrass_scaling_test(P, {1}, {4, 8, 16});
    CHECK(rows[1].energy / rows[0].energy >= 3.0);
    CHECK(rows[2].energy / rows[1].energy >= 3.0);
    CHECK(rows[2].energy / rows[0].energy >= 10.0);
  }
  SUBCASE("under-resolved bump is rejected") {
    TorusGrid g(2, 32);
    auto P = assemble_operator(grushin(), g);
    CHECK_NOTHROW(weierstrass_scaling_test(P, {1}, {2}));
    CHECK_THROWS_AS(weierstrass_scaling_test(P, {1}, {4}), PreconditionError);
    CHECK_THROWS_AS(weierstrass_scaling_test(P, {}, {1}), PreconditionError);
    CHECK_THROWS_AS(weierstrass_scaling_test(P, {2}, {1}), PreconditionError);
  }
}

TEST_CASE("concentration test basics") {
  TorusGrid g(2, 32);
  auto P = assemble_operator(grushin(), g);
  auto A = mask_from_expr(SmoothExpr::parse("x", {"x", "y"}), g, 1e-9);
  auto V = dilate(A, g, 1.0);
  auto rows = concentration_test(P, A, V, {0.4, 0.2});
  REQUIRE(rows.size() == 2);
  for (auto& r : rows) {
    CHECK(std::isfinite(r.C));
    CHECK(r.C >= 0.0);
    CHECK(r.u_size > 0);
    CHECK(r.v_minus_u_size > 0);
  }
  CHECK(rows[0].u_size > rows[1].u_size);
  // Deterministic under a fixed seed.
  auto again = concentration_test(P, A, V, {0.4, 0.2});
  CHECK(again[0].C == rows[0].C);

  ConcentrationOptions few;
  few.random_probes = 5;
  CHECK_THROWS_AS(concentration_test(P, A, V, {0.4}, few), PreconditionError);
  CHECK_THROWS_AS(concentration_test(P, V, A, {0.4}), PreconditionError);
  std::vector<char> none(g.size(), 0);
  CHECK_THROWS_AS(concentration_test(P, none, V, {0.4}), PreconditionError);
  CHECK_THROWS_AS(concentration_test(P, A, V, {2.0}), PreconditionError);
  CHECK_THROWS_AS(concentration_test(P, A, V, {-0.1}), PreconditionError);
}
