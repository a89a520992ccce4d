#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "charflow/char_chain.hpp"
#include "charflow/errors.hpp"
#include "charflow/field_system.hpp"
#include "charflow/ideal.hpp"
#include "charflow/job.hpp"

namespace py = pybind11;
using namespace charflow;

namespace {

std::vector<std::string> to_strings(const std::vector<Poly>& ps, const std::vector<std::string>& vars) {
  std::vector<std::string> out;
  for (const auto& p : ps) out.push_back(p.to_string(vars));
  return out;
}

std::vector<Poly> parse_all(const std::vector<std::string>& texts, const std::vector<std::string>& vars) {
  std::vector<Poly> out;
  for (const auto& t : texts) out.push_back(parse_poly(t, vars));
  return out;
}

GroebnerOptions budgeted(std::size_t budget) {
  GroebnerOptions o;
  o.spair_budget = budget;
  return o;
}

std::string run_job_json(const std::string& config, bool timings) {
  Json j;
  try {
    j = Json::parse(config);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<root>", std::string("invalid JSON: ") + e.what());
  }
  const auto cfg = JobConfig::from_json(j);
  Json report;
  {
    py::gil_scoped_release release;
    report = run_job(cfg, timings);
  }
  return dump_report(report);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact characteristic chains and numeric torus experiments for vector-field systems";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<BudgetExhausted>(m, "BudgetExhausted", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<EvalError>(m, "EvalError", base.ptr());

  m.def(
      "normalize",
      [](const std::string& text, const std::vector<std::string>& vars) {
        return parse_poly(text, vars).to_string(vars);
      },
      py::arg("poly"), py::arg("variables"), "Parse a polynomial and return its canonical form.");

  m.def(
      "bracket",
      [](const std::vector<std::string>& X, const std::vector<std::string>& Y, const std::vector<std::string>& vars) {
        const auto Z = lie_bracket(PolyVectorField(parse_all(X, vars)), PolyVectorField(parse_all(Y, vars)));
        return to_strings(Z.coeffs(), vars);
      },
      py::arg("X"), py::arg("Y"), py::arg("variables"), "Components of the Lie bracket [X, Y].");

  m.def(
      "groebner",
      [](const std::vector<std::string>& gens, const std::vector<std::string>& vars, std::size_t budget) {
        const Ideal I(vars.size(), parse_all(gens, vars));
        py::gil_scoped_release release;
        return to_strings(groebner(I, budgeted(budget)).basis(), vars);
      },
      py::arg("generators"), py::arg("variables"), py::arg("budget") = 200000,
      "Reduced grevlex Groebner basis, sorted by descending leading monomial.");

  m.def(
      "contains_one",
      [](const std::vector<std::string>& gens, const std::vector<std::string>& vars, std::size_t budget) {
        const Ideal I(vars.size(), parse_all(gens, vars));
        py::gil_scoped_release release;
        return contains_one(I, budgeted(budget));
      },
      py::arg("generators"), py::arg("variables"), py::arg("budget") = 200000);

  m.def(
      "char_step",
      [](const std::vector<std::string>& gens, const std::vector<std::vector<std::string>>& fields,
         const std::vector<std::string>& vars) {
        std::vector<PolyVectorField> fs;
        for (const auto& f : fields) fs.emplace_back(parse_all(f, vars));
        const FieldSystem sys(vars, std::move(fs));
        const Ideal I = groebner(Ideal(vars.size(), parse_all(gens, vars)));
        return to_strings(groebner(char_step(I, sys)).basis(), vars);
      },
      py::arg("generators"), py::arg("fields"), py::arg("variables"),
      "Reduced basis of the characteristic-step ideal of V(generators).");

  m.def("run_job_json", &run_job_json, py::arg("config"), py::arg("timings") = false,
        "Run a job from its JSON configuration and return the report as JSON text.");
}
