#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "charflow/emptiness.hpp"
#include "charflow/errors.hpp"
#include "charflow/field_system.hpp"
#include "charflow/ideal.hpp"
#include "naive_groebner.hpp"
#include "random_poly.hpp"

using namespace charflow;

namespace {

const std::vector<std::string> xy{"x", "y"};
Poly P(const std::string& s, const std::vector<std::string>& vars = xy) { return parse_poly(s, vars); }

Ideal I(std::initializer_list<const char*> gens, const std::vector<std::string>& vars = xy) {
  std::vector<Poly> g;
  for (const char* s : gens) g.push_back(P(s, vars));
  return Ideal(vars.size(), std::move(g));
}

}  // namespace

TEST_CASE("groebner examples") {
  CHECK(groebner(I({"x", "1"})).basis() == std::vector<Poly>{Poly::constant(2, 1)});
  CHECK(groebner(I({"0"})).basis().empty());
  CHECK(groebner(Ideal(2, {})).basis().empty());

  auto g = groebner(I({"x^2 - y", "y^2 - x"}));
  CHECK(g.basis() == oracle::groebner({P("x^2 - y"), P("y^2 - x")}, 2));
  // Under grevlex with x > y both inputs are already a reduced basis.
  CHECK(g.basis() == std::vector<Poly>{P("x^2 - y"), P("y^2 - x")});
}

TEST_CASE("groebner matches the naive oracle on random ideals") {
  std::mt19937_64 rng(7);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 2 + trial % 2;
    std::vector<Poly> gens;
    for (int i = 0; i < 2 + trial % 2; ++i) gens.push_back(testgen::random_poly(rng, n, 2 + (n == 2), 3));
    auto ours = groebner(Ideal(n, gens)).basis();
    auto ref = oracle::groebner(gens, n);
    CHECK(ours == ref);
    ++compared;
  }
  CHECK(compared == 60);
}

TEST_CASE("groebner is order-insensitive and idempotent") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 2;
    std::vector<Poly> gens;
    for (int i = 0; i < 3; ++i) gens.push_back(testgen::random_poly(rng, n, 2, 3));
    auto a = groebner(Ideal(n, gens));
    std::reverse(gens.begin(), gens.end());
    std::shuffle(gens.begin(), gens.end(), rng);
    auto b = groebner(Ideal(n, gens));
    CHECK(a.basis() == b.basis());
    auto again = groebner(Ideal(n, a.basis()));
    CHECK(again.basis() == a.basis());
  }
}

TEST_CASE("normal_form examples and membership") {
  CHECK(normal_form(P("x"), groebner(I({"x"}))).is_zero());
  CHECK(normal_form(Poly::constant(2, 1), groebner(I({"x", "y"}))) == Poly::constant(2, 1));
  CHECK(normal_form(P("x^2*y"), groebner(I({"x^2 - y"}))) == P("y^2"));
  CHECK_THROWS_AS(normal_form(P("x"), I({"x"})), PreconditionError);

  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 2 + trial % 2;
    std::vector<Poly> gens;
    for (int i = 0; i < 2; ++i) gens.push_back(testgen::random_poly(rng, n, 2, 3));
    auto G = groebner(Ideal(n, gens));
    Poly f(n);
    for (const auto& g : gens) f += testgen::random_poly(rng, n, 2, 3) * g;
    CHECK(normal_form(f, G).is_zero());
    auto h = testgen::random_poly(rng, n, 3, 4);
    auto r = normal_form(h, G);
    CHECK(normal_form(r, G) == r);
    CHECK(normal_form(h - r, G).is_zero());
  }
}

TEST_CASE("contains_one") {
  CHECK(contains_one(I({"x", "1"})));
  CHECK_FALSE(contains_one(I({"x^2 + y^2"})));
  CHECK(oracle::groebner({P("x^2 + y^2")}, 2) != std::vector<Poly>{Poly::constant(2, 1)});
  CHECK(contains_one(I({"x", "x - 1"})));
}

TEST_CASE("budget exhaustion is reported") {
  GroebnerOptions tight;
  tight.spair_budget = 1;
  auto ideal = I({"x^3 - y^2 + x*y", "y^3 - x^2 - 1", "x*y^2 - x + y"});
  CHECK_THROWS_AS(groebner(ideal, tight), BudgetExhausted);
  GroebnerOptions tiny_steps;
  tiny_steps.step_budget = 3;
  CHECK_THROWS_AS(groebner(ideal, tiny_steps), BudgetExhausted);
}

TEST_CASE("determinant") {
  std::vector<std::vector<Poly>> cols{{P("1"), P("0")}, {P("0"), P("x")}};
  CHECK(determinant(cols) == P("x"));
  std::vector<std::vector<Poly>> swapped{cols[1], cols[0]};
  CHECK(determinant(swapped) == P("-x"));
  const std::vector<std::string> xyz{"x", "y", "z"};
  auto Q = [&](const char* s) { return parse_poly(s, xyz); };
  // 3x3 with a known cofactor expansion
  std::vector<std::vector<Poly>> c3{{Q("x"), Q("1"), Q("0")}, {Q("0"), Q("y"), Q("1")}, {Q("1"), Q("0"), Q("z")}};
  CHECK(determinant(c3) == Q("x*y*z + 1"));
}

TEST_CASE("minors_ideal examples") {
  auto one = Poly::constant(2, 1), zero = Poly(2), x = P("x");
  CHECK(minors_ideal({{one, zero}, {zero, x}}, 2).generators() == std::vector<Poly>{x});
  CHECK(contains_one(minors_ideal({{one, zero}, {zero, x}, {zero, one}}, 2)));
  CHECK(minors_ideal({{one, zero}}, 2).is_zero_ideal());
  CHECK_THROWS_AS(minors_ideal({{one, zero}, {zero, x}}, 2, 0), BudgetExhausted);
}

TEST_CASE("minors_ideal with an identity block contains 1") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + trial % 2;
    std::vector<std::vector<Poly>> cols;
    for (int extra = 0; extra < 2; ++extra) {
      std::vector<Poly> c;
      for (std::size_t k = 0; k < n; ++k) c.push_back(testgen::random_poly(rng, n, 2, 2));
      cols.push_back(c);
    }
    for (std::size_t k = 0; k < n; ++k) {
      std::vector<Poly> e(n, Poly(n));
      e[k] = Poly::constant(n, 1);
      cols.insert(cols.begin() + static_cast<long>(rng() % (cols.size() + 1)), e);
    }
    CHECK(contains_one(minors_ideal(cols, n)));
  }
}

TEST_CASE("real_emptiness_status tiers") {
  SearchBox box;
  CHECK(real_emptiness_status(I({"x", "1"}), box).tag == EmptinessTag::EmptyCertified);

  auto circle = real_emptiness_status(I({"x^2 + y^2 - 1"}), box);
  REQUIRE(circle.tag == EmptinessTag::NonEmptyWitness);
  CHECK(circle.residual < 1e-12);
  CHECK(std::abs(circle.point[0] * circle.point[0] + circle.point[1] * circle.point[1] - 1) < 1e-6);

  auto imaginary = real_emptiness_status(I({"x^2 + y^2 + 1"}), box);
  CHECK(imaginary.tag == EmptinessTag::Unknown);

  GroebnerOptions tight;
  tight.spair_budget = 0;
  auto degraded = real_emptiness_status(I({"x^2 - y", "x*y - 1"}), box, tight);
  CHECK(degraded.tag != EmptinessTag::EmptyCertified);
  CHECK_FALSE(degraded.note.empty());

  SearchBox bad;
  bad.grid_per_axis = 1;
  CHECK_THROWS_AS(real_emptiness_status(I({"x"}), bad), PreconditionError);
}

TEST_CASE("witness points re-evaluate exactly near zero") {
  std::mt19937_64 rng(12);
  SearchBox box;
  int witnesses = 0;
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Poly> gens{testgen::random_poly(rng, 2, 2, 3)};
    if (gens[0].is_zero() || gens[0].is_constant()) continue;
    Ideal ideal(2, gens);
    auto st = real_emptiness_status(ideal, box);
    if (contains_one(ideal)) CHECK(st.tag == EmptinessTag::EmptyCertified);
    if (st.tag != EmptinessTag::NonEmptyWitness) continue;
    ++witnesses;
    std::vector<Rational> q;
    for (double v : st.point) {
      Rational r(std::ldexp(std::round(std::ldexp(v, 40)), 0));
      r /= Rational(mpz_class(1) << 40);
      q.push_back(r);
    }
    const Ideal G = groebner(ideal);
    for (const auto& g : G.basis()) {
      const double v = std::abs(to_double(g.evaluate(std::span<const Rational>(q))));
      CHECK(v < std::sqrt(box.tol_witness));
    }
  }
  CHECK(witnesses > 5);
}
