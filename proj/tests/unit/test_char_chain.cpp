#include <doctest.h>

#include <random>

#include "charflow/char_chain.hpp"
#include "charflow/errors.hpp"
#include "naive_groebner.hpp"

using namespace charflow;

namespace {

const std::vector<std::string> xy{"x", "y"};
Poly P(const std::string& s) { return parse_poly(s, xy); }
const Poly one2 = Poly::constant(2, 1);

FieldSystem grushin() { return parse_field_system("vars x,y; field 1,0; field 0,x"); }
FieldSystem line_system() { return parse_field_system("vars x,y; field 1,0; field 0,x^2*y"); }
FieldSystem origin_system() { return parse_field_system("vars x,y; field y^2,0; field 0,x^2"); }

}  // namespace

TEST_CASE("degeneration_ideal examples") {
  auto d1 = degeneration_ideal(grushin(), 1);
  CHECK(groebner(d1).basis() == std::vector<Poly>{P("x")});
  CHECK(contains_one(degeneration_ideal(grushin(), 2)));
  auto flat = parse_field_system("vars x,y; field 1,0; field 0,1");
  for (std::size_t s = 1; s <= 3; ++s) CHECK(contains_one(degeneration_ideal(flat, s)));

  ChainOptions capped;
  capped.max_columns = 3;
  CHECK_THROWS_AS(degeneration_ideal(grushin(), 2, capped), BudgetExhausted);
}

TEST_CASE("char_step examples") {
  auto step = groebner(char_step(groebner(Ideal(2, {P("x")})), grushin()));
  CHECK(step.basis() == std::vector<Poly>{one2});

  auto line = groebner(char_step(groebner(Ideal(2, {P("y")})), line_system()));
  CHECK(line.basis() == std::vector<Poly>{P("y")});

  auto unit = groebner(char_step(Ideal::unit(2), grushin()));
  CHECK(unit.basis() == std::vector<Poly>{one2});

  CHECK_THROWS_AS(char_step(Ideal(2, {P("x")}), grushin()), PreconditionError);
}

TEST_CASE("run_chain on Grushin") {
  SearchBox box;
  auto r1 = run_chain(grushin(), 1, box);
  REQUIRE(r1.steps.size() == 2);
  CHECK(r1.steps[0].ideal.basis() == std::vector<Poly>{P("x")});
  CHECK(r1.steps[0].status.tag == EmptinessTag::NonEmptyWitness);
  CHECK(r1.steps[1].status.tag == EmptinessTag::EmptyCertified);
  CHECK(r1.verdict.tag == VerdictTag::Precompact);
  CHECK(r1.verdict.certified_step == 1u);
  CHECK(r1.steps[0].ideal.basis() == oracle::groebner(r1.steps[0].ideal.generators(), 2));
  CHECK(r1.steps[1].ideal.basis() == oracle::groebner(r1.steps[1].ideal.generators(), 2));

  auto r2 = run_chain(grushin(), 2, box);
  REQUIRE(r2.steps.size() == 1);
  CHECK(r2.verdict.tag == VerdictTag::Precompact);
  CHECK(r2.verdict.certified_step == 0u);
}

TEST_CASE("run_chain stabilizes on the characteristic line") {
  SearchBox box;
  auto r = run_chain(line_system(), 3, box);
  REQUIRE(r.stabilized_at.has_value());
  for (const auto& st : r.steps) {
    CHECK(st.ideal.basis() == std::vector<Poly>{P("y")});
    CHECK(st.status.tag == EmptinessTag::NonEmptyWitness);
  }
  CHECK(r.verdict.tag == VerdictTag::Unknown);  // no witness supplied to run_chain
}

TEST_CASE("flat fields certify at step 0") {
  auto r = run_chain(parse_field_system("vars x,y; field 1,0; field 0,1"), 1, SearchBox{});
  REQUIRE(r.steps.size() == 1);
  CHECK(r.verdict.tag == VerdictTag::Precompact);
  CHECK(r.verdict.certified_step == 0u);
}

TEST_CASE("verify_witness examples") {
  SearchBox box;
  auto w = verify_witness(Ideal(2, {P("y")}), line_system(), box);
  REQUIRE(w.has_value());
  CHECK(w->tangency_certified);
  CHECK(w->jacobian_rank == 1);
  CHECK(std::abs(w->point[1]) < 1e-9);

  auto o = verify_witness(Ideal(2, {P("x"), P("y")}), origin_system(), box);
  REQUIRE(o.has_value());
  CHECK(o->tangency_certified);
  CHECK(o->jacobian_rank == 2);

  CHECK_FALSE(verify_witness(Ideal::unit(2), grushin(), box).has_value());
  // {x = 0} is transversal to d/dx: no witness
  CHECK_FALSE(verify_witness(Ideal(2, {P("x")}), grushin(), box).has_value());
}

TEST_CASE("verdict logic") {
  SearchBox box;
  auto grush = run_chain(grushin(), 1, box);
  CHECK(verdict(grush, std::nullopt).tag == VerdictTag::Precompact);

  auto line = run_chain(line_system(), 3, box);
  auto w = verify_witness(line.steps.back().ideal, line_system(), box);
  auto v = verdict(line, w);
  CHECK(v.tag == VerdictTag::NotPrecompact);
  REQUIRE(v.witness.has_value());
  CHECK(v.witness->tangency_certified);

  ChainReport undecided;
  undecided.dimension = 2;
  ChainStep st{0, groebner(Ideal(2, {P("x^2 + y^2 + 1")})), {}, 1, {}};
  undecided.steps.push_back(st);
  undecided.steps.push_back(ChainStep{1, st.ideal, {}, 1, {}});
  auto u = verdict(undecided, std::nullopt);
  CHECK(u.tag == VerdictTag::Unknown);
  CHECK(u.reason == "real emptiness undecided");

  SubmanifoldWitness fake{groebner(Ideal(2, {P("y")})), {0.0, 0.0}, 1, false};
  auto uw = verdict(undecided, fake);
  CHECK(uw.tag == VerdictTag::Unknown);
  CHECK(uw.reason.find("uncertified") != std::string::npos);
}

TEST_CASE("analyze finds both witnesses") {
  SearchBox box;
  auto line = analyze(line_system(), 3, box);
  CHECK(line.report.verdict.tag == VerdictTag::NotPrecompact);
  CHECK(line.witness->jacobian_rank == 1);

  auto origin = analyze(origin_system(), 2, box);
  CHECK(origin.report.verdict.tag == VerdictTag::NotPrecompact);
  REQUIRE(origin.witness.has_value());
  CHECK(origin.witness->jacobian_rank == 2);
  CHECK(origin.witness->ideal.basis() == std::vector<Poly>{P("x"), P("y")});
  const FieldSystem osys = origin_system();
  for (const auto& X : osys.fields()) {
    auto v = X.evaluate(origin.witness->point);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 0.0);
  }

  auto grush = analyze(grushin(), 1, box);
  CHECK(grush.report.verdict.tag == VerdictTag::Precompact);
  CHECK_FALSE(grush.witness.has_value());
}

TEST_CASE("zero degeneration ideal reports interior") {
  // A single field on R^2 never spans: every 2x2 minor is absent.
  auto sys = parse_field_system("vars x,y; field 1,0");
  auto a = analyze(sys, 2, SearchBox{});
  CHECK(a.report.steps.front().ideal.is_zero_ideal());
  CHECK(a.report.verdict.tag != VerdictTag::Precompact);
}

TEST_CASE("amano_check examples") {
  SearchBox box;
  auto pos = amano_check(grushin(), P("x"), {PolyVectorField::coordinate(2, 0)}, 1, box);
  CHECK(pos.holds == Tristate::True);
  CHECK(pos.chain.verdict.tag == VerdictTag::Precompact);
  CHECK(pos.chain.verdict.certified_step <= 1u);
  CHECK(pos.derivatives.size() == 2);
  CHECK(pos.derivatives[1] == one2);

  auto neg = amano_check(line_system(), P("y"), {PolyVectorField::coordinate(2, 0)}, 3, box);
  CHECK(neg.holds == Tristate::False);
  CHECK(neg.chain.stabilized_at.has_value());
  CHECK(neg.inclusion_violations == 0);
  CHECK(neg.inclusion_checked > 0);

  CHECK_THROWS_AS(amano_check(grushin(), P("x"), {}, 1, box), PreconditionError);
}
