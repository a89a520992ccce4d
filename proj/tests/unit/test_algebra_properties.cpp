#include <doctest.h>

#include <random>

#include "charflow/field_system.hpp"
#include "random_poly.hpp"

using namespace charflow;

TEST_CASE("ring laws") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 3;
    auto a = testgen::random_poly(rng, n, 3, 5);
    auto b = testgen::random_poly(rng, n, 3, 5);
    auto c = testgen::random_poly(rng, n, 3, 5);
    CHECK((a + b) + c == a + (b + c));
    CHECK((a * b) * c == a * (b * c));
    CHECK(a * (b + c) == a * b + a * c);
    CHECK(a * b == b * a);
    CHECK(a + b == b + a);
    CHECK((a - a).is_zero());
    CHECK(a * Poly::constant(n, 1) == a);
  }
}

TEST_CASE("Leibniz rule") {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 3;
    auto X = testgen::random_field(rng, n, 3, 3);
    auto f = testgen::random_poly(rng, n, 3, 4);
    auto g = testgen::random_poly(rng, n, 3, 4);
    CHECK(apply_field(X, f * g) == f * apply_field(X, g) + g * apply_field(X, f));
  }
}

TEST_CASE("bracket antisymmetry and Jacobi") {
  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + trial % 3;
    auto X = testgen::random_field(rng, n, 3, 3);
    auto Y = testgen::random_field(rng, n, 3, 3);
    auto Z = testgen::random_field(rng, n, 3, 3);
    CHECK((lie_bracket(X, Y) + lie_bracket(Y, X)).is_zero());
    auto jac = lie_bracket(X, lie_bracket(Y, Z)) + lie_bracket(Y, lie_bracket(Z, X)) + lie_bracket(Z, lie_bracket(X, Y));
    CHECK(jac.is_zero());
  }
}

TEST_CASE("bracket acts as commutator of derivations") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 3;
    auto X = testgen::random_field(rng, n, 2, 3);
    auto Y = testgen::random_field(rng, n, 2, 3);
    auto f = testgen::random_poly(rng, n, 3, 4);
    CHECK(apply_field(lie_bracket(X, Y), f) == apply_field(X, apply_field(Y, f)) - apply_field(Y, apply_field(X, f)));
  }
}
