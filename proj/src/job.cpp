#include "charflow/job.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "charflow/char_chain.hpp"
#include "charflow/errors.hpp"
#include "charflow/field_system.hpp"
#include "charflow/glaeser.hpp"
#include "charflow/torus.hpp"

namespace charflow {

namespace {

constexpr int kSchemaVersion = 1;

// ---- config reading -------------------------------------------------------

void allow_keys(const Json& obj, const std::string& path, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw ConfigError(path.empty() ? it.key() : path + "." + it.key(), "unknown field");
  }
}


std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

std::size_t as_count(const Json& v, const std::string& path, std::size_t min_value) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0))
    throw ConfigError(path, "expected a non-negative integer");
  const auto x = v.get<std::uint64_t>();
  if (x < min_value) throw ConfigError(path, "must be at least " + std::to_string(min_value));
  return static_cast<std::size_t>(x);
}

double as_positive(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double x = v.get<double>();
  if (!(x > 0) || !std::isfinite(x)) throw ConfigError(path, "must be positive");
  return x;
}

std::vector<std::string> string_list(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_string(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> positive_list(const Json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(as_positive(v[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<std::string>> field_table(const Json& v, const std::string& path, std::size_t n,
                                                  bool allow_empty = false) {
  if (!v.is_array() || (v.empty() && !allow_empty)) throw ConfigError(path, "expected a non-empty array of fields");
  std::vector<std::vector<std::string>> out;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const std::string p = path + "[" + std::to_string(j) + "]";
    auto comps = string_list(v[j], p);
    if (comps.size() != n)
      throw ConfigError(p, "expected " + std::to_string(n) + " components, got " + std::to_string(comps.size()));
    out.push_back(std::move(comps));
  }
  return out;
}

bool is_torus_mode(const std::string& m) {
  return m == "spectrum" || m == "weierstrass" || m == "concentration";
}
bool is_poly_mode(const std::string& m) { return m == "analyze" || m == "amano"; }

void check_power_of_two(std::size_t N, const std::string& path) {
  if (N < 4 || (N & (N - 1)) != 0) throw ConfigError(path, "must be a power of two >= 4");
  if (N > 4096) throw ConfigError(path, "must be at most 4096");
}

// ---- engine construction ---------------------------------------------------

FieldSystem poly_system(const std::vector<std::string>& vars, const std::vector<std::vector<std::string>>& comps,
                        const std::string& path) {
  std::vector<PolyVectorField> fields;
  for (std::size_t j = 0; j < comps.size(); ++j) {
    std::vector<Poly> c;
    for (std::size_t k = 0; k < comps[j].size(); ++k) {
      try {
        c.push_back(parse_poly(comps[j][k], vars));
      } catch (const ParseError& e) {
        throw ConfigError(path + "[" + std::to_string(j) + "][" + std::to_string(k) + "]", e.what());
      }
    }
    fields.emplace_back(std::move(c));
  }
  return FieldSystem(vars, std::move(fields));
}

SmoothFieldSystem smooth_system(const std::vector<std::string>& vars,
                                const std::vector<std::vector<std::string>>& comps) {
  for (std::size_t j = 0; j < comps.size(); ++j)
    for (std::size_t k = 0; k < comps[j].size(); ++k) {
      try {
        SmoothExpr::parse(comps[j][k], vars);
      } catch (const ParseError& e) {
        throw ConfigError("fields[" + std::to_string(j) + "][" + std::to_string(k) + "]", e.what());
      }
    }
  return parse_smooth_system(vars, comps);
}

SmoothExpr smooth_expr(const std::string& text, const std::vector<std::string>& vars, const std::string& path) {
  try {
    return SmoothExpr::parse(text, vars);
  } catch (const ParseError& e) {
    throw ConfigError(path, e.what());
  }
}

Poly poly_expr(const std::string& text, const std::vector<std::string>& vars, const std::string& path) {
  try {
    return parse_poly(text, vars);
  } catch (const ParseError& e) {
    throw ConfigError(path, e.what());
  }
}

SearchBox search_box(const JobConfig& c) {
  SearchBox box;
  box.radius = parse_rational(c.search_box.radius);
  box.grid_per_axis = c.search_box.grid_per_axis;
  box.tol_witness = c.search_box.tol_witness;
  return box;
}

ChainOptions chain_options(const JobConfig& c) {
  ChainOptions o;
  o.groebner.spair_budget = c.budget;
  return o;
}

// ---- report pieces ---------------------------------------------------------

Json polys(const std::vector<Poly>& ps, const std::vector<std::string>& vars) {
  Json a = Json::array();
  for (const auto& p : ps) a.push_back(p.to_string(vars));
  return a;
}

Json chain_json(const ChainReport& r, const std::vector<std::string>& vars) {
  Json a = Json::array();
  for (const auto& st : r.steps) {
    Json e;
    e["k"] = st.k;
    e["generator_count"] = st.generator_count;
    e["status"] = to_string(st.status.tag);
    e["basis"] = st.ideal.has_basis() ? polys(st.ideal.basis(), vars) : Json(nullptr);
    if (st.status.has_witness()) e["witness_point"] = st.status.point;
    if (!st.status.note.empty()) e["note"] = st.status.note;
    a.push_back(e);
  }
  return a;
}

Json verdict_json(const Verdict& v, const std::vector<std::string>& vars) {
  Json j;
  j["tag"] = to_string(v.tag);
  j["reason"] = v.reason;
  j["clause"] = nullptr;
  j["certificate"] = nullptr;
  if (v.tag == VerdictTag::Precompact && v.certified_step) {
    j["clause"] = "an iterated characteristic set of the degeneration locus is empty";
    j["certificate"] = {{"kind", "unit_ideal"}, {"step", *v.certified_step}, {"basis", Json::array({"1"})}};
  } else if (v.tag == VerdictTag::NotPrecompact && v.witness) {
    j["clause"] = "a characteristic submanifold exists";
    j["certificate"] = {{"kind", "characteristic_submanifold"},
                        {"ideal", polys(v.witness->ideal.has_basis() ? v.witness->ideal.basis()
                                                                      : v.witness->ideal.generators(),
                                        vars)},
                        {"point", v.witness->point},
                        {"codimension", v.witness->jacobian_rank},
                        {"tangency_certified", v.witness->tangency_certified}};
  }
  return j;
}

Json numeric_verdict() {
  return {{"tag", "unknown"},
          {"reason", "numeric experiment: no verdict is certified"},
          {"clause", nullptr},
          {"certificate", nullptr}};
}

Json table(std::vector<std::string> header) { return {{"header", header}, {"rows", Json::array()}}; }

Json num(double x) {
  if (std::isfinite(x)) return x;
  return x > 0 ? "inf" : (x < 0 ? "-inf" : "nan");
}

const char* error_type(const std::exception& e) {
  if (dynamic_cast<const BudgetExhausted*>(&e)) return "BudgetExhausted";
  if (dynamic_cast<const EvalError*>(&e)) return "EvalError";
  if (dynamic_cast<const PreconditionError*>(&e)) return "PreconditionError";
  if (dynamic_cast<const DimensionMismatch*>(&e)) return "DimensionMismatch";
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  if (dynamic_cast<const Error*>(&e)) return "Error";
  return "InternalError";
}

// ---- modes -----------------------------------------------------------------

void run_analyze(const JobConfig& c, Json& report) {
  const FieldSystem sys = poly_system(c.variables, c.fields, "fields");
  const Analysis a = analyze(sys, c.s, search_box(c), chain_options(c));
  report["chain"] = chain_json(a.report, c.variables);
  report["verdict"] = verdict_json(a.report.verdict, c.variables);
  for (const auto& w : a.report.warnings) report["warnings"].push_back(w);
  Json res;
  res["s"] = a.report.s;
  res["dimension"] = a.report.dimension;
  res["stabilized_at"] = a.report.stabilized_at ? Json(*a.report.stabilized_at) : Json(nullptr);
  res["budget_exhausted"] = a.report.budget_exhausted;
  res["witness_source"] = a.witness_source;
  report["results"] = res;
}

void run_amano(const JobConfig& c, Json& report) {
  const FieldSystem sys = poly_system(c.variables, c.fields, "fields");
  const Poly phi = poly_expr(*c.experiment.phi, c.variables, "experiment.phi");
  const FieldSystem ys = poly_system(c.variables, c.experiment.ys, "experiment.ys");
  const AmanoResult r = amano_check(sys, phi, ys.fields(), c.s, search_box(c), chain_options(c));
  report["chain"] = chain_json(r.chain, c.variables);
  report["verdict"] = verdict_json(r.chain.verdict, c.variables);
  for (const auto& w : r.chain.warnings) report["warnings"].push_back(w);
  if (r.holds == Tristate::Unknown) report["warnings"].push_back("amano condition undecided: " + r.status.note);
  Json am;
  am["holds"] = to_string(r.holds);
  am["derivatives"] = polys(r.derivatives, c.variables);
  am["status"] = to_string(r.status.tag);
  am["comparison"] = r.comparison;
  am["inclusion_checked"] = r.inclusion_checked;
  am["inclusion_violations"] = r.inclusion_violations;
  report["results"] = {{"amano", am}, {"s", c.s}};
}

void run_spectrum(const JobConfig& c, Json& report) {
  SpectrumJob job;
  job.fields = smooth_system(c.variables, c.fields);
  if (c.density) job.density = smooth_expr(*c.density, c.variables, "density");
  job.resolutions = c.grid.resolutions.empty() ? std::vector<std::size_t>{c.grid.N} : c.grid.resolutions;
  job.m = c.grid.m_eigs;
  if (c.experiment.mask_A) job.marked = smooth_expr(*c.experiment.mask_A, c.variables, "experiment.masks.A");
  job.marked_tol = c.experiment.mask_tol;
  job.delta = c.experiment.delta;
  job.eigen.seed = c.seed;
  const SpectralReport r = spectral_report(job);
  Json t = table({"resolution", "index", "eigenvalue", "localization"});
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    for (std::size_t i = 0; i < e.eigenvalues.size(); ++i)
      t["rows"].push_back({e.resolution, i, num(e.eigenvalues[i]), num(e.localization[i])});
    entries.push_back({{"resolution", e.resolution},
                       {"eigenvalues", e.eigenvalues},
                       {"residuals", e.residuals},
                       {"converged", e.converged}});
    if (!e.converged) report["warnings"].push_back("N=" + std::to_string(e.resolution) + ": eigen solver did not converge");
  }
  for (const auto& w : r.warnings) report["warnings"].push_back(w);
  report["tables"]["spectrum"] = t;
  report["results"] = {{"entries", entries}};
}

std::vector<std::size_t> slice_axes(const JobConfig& c) {
  std::vector<std::size_t> axes;
  for (std::size_t i = 0; i < c.experiment.slice.size(); ++i) {
    auto it = std::find(c.variables.begin(), c.variables.end(), c.experiment.slice[i]);
    if (it == c.variables.end())
      throw ConfigError("experiment.slice[" + std::to_string(i) + "]", "not a declared variable");
    axes.push_back(static_cast<std::size_t>(it - c.variables.begin()));
  }
  return axes;
}

void run_weierstrass(const JobConfig& c, Json& report) {
  const auto sys = smooth_system(c.variables, c.fields);
  const auto axes = slice_axes(c);
  TorusGrid grid(c.variables.size(), c.grid.N);
  std::optional<SmoothExpr> rho;
  if (c.density) rho = smooth_expr(*c.density, c.variables, "density");
  const auto P = assemble_operator(sys, grid, rho);
  const auto rows = weierstrass_scaling_test(P, axes, c.experiment.t_values);
  Json t = table({"t", "l2_norm_sq", "energy"});
  for (const auto& r : rows) t["rows"].push_back({num(r.t), num(r.l2_norm_sq), num(r.energy)});
  report["tables"]["scaling"] = t;
  report["results"] = {{"N", c.grid.N}, {"assembled_as", P.assembled_as()}};
}

void run_concentration(const JobConfig& c, Json& report) {
  const auto sys = smooth_system(c.variables, c.fields);
  TorusGrid grid(c.variables.size(), c.grid.N);
  std::optional<SmoothExpr> rho;
  if (c.density) rho = smooth_expr(*c.density, c.variables, "density");
  const auto P = assemble_operator(sys, grid, rho);
  const auto A = mask_from_expr(smooth_expr(*c.experiment.mask_A, c.variables, "experiment.masks.A"), grid,
                                c.experiment.mask_tol);
  const auto V = dilate(A, grid, c.experiment.V_radius);
  ConcentrationOptions opt;
  opt.seed = c.seed;
  opt.eigen_probes = c.experiment.eigen_probes;
  opt.random_probes = c.experiment.random_probes;
  const auto rows = concentration_test(P, A, V, c.experiment.eps_values, opt);
  Json t = table({"eps", "C", "argmax", "u_size", "v_minus_u_size"});
  double lo = INFINITY, hi = 0;
  for (const auto& r : rows) {
    const Json arg = r.argmax == SIZE_MAX ? Json(-1) : Json(r.argmax);
    t["rows"].push_back({num(r.eps), num(r.C), arg, r.u_size, r.v_minus_u_size});
    lo = std::min(lo, r.C);
    hi = std::max(hi, r.C);
  }
  report["tables"]["concentration"] = t;
  report["results"] = {{"N", c.grid.N}, {"max_over_min", lo > 0 ? num(hi / lo) : Json("inf")}};
}

void run_glaeser(const JobConfig& c, Json& report) {
  const auto sys = smooth_system(c.variables, c.fields);
  const std::size_t n = c.variables.size();
  std::optional<PointCloud> A0;
  if (c.experiment.zero_set) {
    if (n > 3) throw ConfigError("variables", "zero-set clouds live on tori of dimension 1 to 3");
    TorusGrid grid(n, c.grid.N);
    A0 = cloud_from_zero_set(smooth_expr(*c.experiment.zero_set, c.variables, "experiment.zero_set"), grid,
                             c.experiment.mask_tol);
  } else {
    const auto metric = c.experiment.metric == "torus" ? CloudMetric::Torus : CloudMetric::Euclidean;
    A0 = PointCloud(n, read_cloud_csv(*c.experiment.cloud, n), c.experiment.scale, metric);
  }
  NumericChainOptions opt;
  opt.theta_char_deg = c.experiment.theta_char_deg;
  opt.max_k = c.experiment.max_k;
  const NumericChain chain = numeric_char_chain(sys, *A0, opt);
  Json steps = Json::array();
  for (const auto& st : chain.steps) {
    steps.push_back({{"k", st.k}, {"size", st.cloud.size()}, {"characteristic_count", st.characteristic_count()}});
    std::vector<std::string> header = c.variables;
    header.push_back("characteristic");
    header.push_back("tangent_dim");
    Json t = table(header);
    for (std::size_t i = 0; i < st.cloud.size(); ++i) {
      Json row = Json::array();
      for (double x : st.cloud.point(i)) row.push_back(num(x));
      row.push_back(i < st.characteristic.size() ? int(st.characteristic[i]) : 0);
      row.push_back(i < st.tangent_dim.size() ? Json(st.tangent_dim[i]) : Json(0));
      t["rows"].push_back(row);
    }
    report["tables"]["glaeser_step" + std::to_string(st.k)] = t;
  }
  report["results"] = {{"steps", steps},
                       {"stop_reason", chain.stop_reason},
                       {"emptied", chain.emptied},
                       {"stabilized", chain.stabilized},
                       {"v_floor", num(chain.v_floor)},
                       {"lambda_applications", 2 * n}};
  report["warnings"].push_back(
      "heuristic: discrete closure inflates tangent fibers near singular points of the cloud");
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

}  // namespace

JobConfig JobConfig::from_json(const Json& j) {
  allow_keys(j, "", {"mode", "dimension", "variables", "fields", "s", "seed", "budget", "search_box", "grid",
                     "density", "experiment", "output"});
  JobConfig c;
  if (!j.contains("mode")) throw ConfigError("mode", "required field is missing");
  c.mode = as_string(j["mode"], "mode");
  if (std::find(std::begin(kModes), std::end(kModes), c.mode) == std::end(kModes))
    throw ConfigError("mode", "unknown mode '" + c.mode + "'");

  if (!j.contains("variables")) throw ConfigError("variables", "required field is missing");
  c.variables = string_list(j["variables"], "variables");
  if (c.variables.empty()) throw ConfigError("variables", "at least one variable is required");
  if (std::set<std::string>(c.variables.begin(), c.variables.end()).size() != c.variables.size())
    throw ConfigError("variables", "duplicate variable name");
  const std::size_t n = c.variables.size();
  if (j.contains("dimension") && as_count(j["dimension"], "dimension", 1) != n)
    throw ConfigError("dimension", "does not match the number of variables");
  if (is_poly_mode(c.mode) && n > 8) throw ConfigError("variables", "at most 8 variables are supported");
  if ((is_torus_mode(c.mode)) && n > 3) throw ConfigError("variables", "torus modes support dimension 1 to 3");

  if (!j.contains("fields")) throw ConfigError("fields", "required field is missing");
  c.fields = field_table(j["fields"], "fields", n);

  if (j.contains("s")) c.s = as_count(j["s"], "s", 1);
  if (j.contains("seed")) c.seed = as_count(j["seed"], "seed", 0);
  if (j.contains("budget")) c.budget = as_count(j["budget"], "budget", 1);
  if (j.contains("output")) c.output = as_string(j["output"], "output");
  if (j.contains("density")) c.density = as_string(j["density"], "density");

  if (j.contains("search_box")) {
    const auto& b = j["search_box"];
    allow_keys(b, "search_box", {"radius", "grid_per_axis", "tol_witness"});
    if (b.contains("radius")) {
      const auto& r = b["radius"];
      if (r.is_string()) c.search_box.radius = r.get<std::string>();
      else if (r.is_number_integer()) c.search_box.radius = std::to_string(r.get<long long>());
      else throw ConfigError("search_box.radius", "expected an integer or a rational string such as \"3/2\"");
      try {
        if (!(parse_rational(c.search_box.radius) > 0)) throw ConfigError("search_box.radius", "must be positive");
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception&) {
        throw ConfigError("search_box.radius", "not a rational number");
      }
    }
    if (b.contains("grid_per_axis")) c.search_box.grid_per_axis = as_count(b["grid_per_axis"], "search_box.grid_per_axis", 2);
    if (b.contains("tol_witness")) c.search_box.tol_witness = as_positive(b["tol_witness"], "search_box.tol_witness");
  }

  if (j.contains("grid")) {
    const auto& g = j["grid"];
    allow_keys(g, "grid", {"N", "m_eigs", "resolutions"});
    if (g.contains("N")) c.grid.N = as_count(g["N"], "grid.N", 1);
    if (g.contains("m_eigs")) c.grid.m_eigs = as_count(g["m_eigs"], "grid.m_eigs", 1);
    if (g.contains("resolutions")) {
      const auto& rs = g["resolutions"];
      if (!rs.is_array()) throw ConfigError("grid.resolutions", "expected an array");
      for (std::size_t i = 0; i < rs.size(); ++i) {
        const std::string p = "grid.resolutions[" + std::to_string(i) + "]";
        c.grid.resolutions.push_back(as_count(rs[i], p, 1));
        check_power_of_two(c.grid.resolutions.back(), p);
      }
    }
  }
  check_power_of_two(c.grid.N, "grid.N");
  if (c.grid.m_eigs > 50) throw ConfigError("grid.m_eigs", "must be at most 50");

  if (j.contains("experiment")) {
    const auto& e = j["experiment"];
    allow_keys(e, "experiment", {"t_values", "eps_values", "slice", "masks", "probes", "zero_set", "cloud", "scale",
                                 "metric", "theta_char_deg", "max_k", "phi", "ys"});
    auto& x = c.experiment;
    if (e.contains("t_values")) x.t_values = positive_list(e["t_values"], "experiment.t_values");
    if (e.contains("eps_values")) x.eps_values = positive_list(e["eps_values"], "experiment.eps_values");
    if (e.contains("slice")) x.slice = string_list(e["slice"], "experiment.slice");
    if (e.contains("masks")) {
      const auto& m = e["masks"];
      allow_keys(m, "experiment.masks", {"A", "tol", "V_radius", "delta"});
      if (m.contains("A")) x.mask_A = as_string(m["A"], "experiment.masks.A");
      if (m.contains("tol")) x.mask_tol = as_positive(m["tol"], "experiment.masks.tol");
      if (m.contains("V_radius")) x.V_radius = as_positive(m["V_radius"], "experiment.masks.V_radius");
      if (m.contains("delta")) x.delta = as_positive(m["delta"], "experiment.masks.delta");
    }
    if (e.contains("probes")) {
      const auto& p = e["probes"];
      allow_keys(p, "experiment.probes", {"eigen", "random"});
      if (p.contains("eigen")) x.eigen_probes = as_count(p["eigen"], "experiment.probes.eigen", 0);
      if (p.contains("random")) x.random_probes = as_count(p["random"], "experiment.probes.random", 0);
    }
    if (e.contains("zero_set")) x.zero_set = as_string(e["zero_set"], "experiment.zero_set");
    if (e.contains("cloud")) x.cloud = as_string(e["cloud"], "experiment.cloud");
    if (e.contains("scale")) x.scale = as_positive(e["scale"], "experiment.scale");
    if (e.contains("metric")) {
      x.metric = as_string(e["metric"], "experiment.metric");
      if (x.metric != "euclidean" && x.metric != "torus")
        throw ConfigError("experiment.metric", "expected \"euclidean\" or \"torus\"");
    }
    if (e.contains("theta_char_deg")) x.theta_char_deg = as_positive(e["theta_char_deg"], "experiment.theta_char_deg");
    if (e.contains("max_k")) x.max_k = as_count(e["max_k"], "experiment.max_k", 0);
    if (e.contains("phi")) x.phi = as_string(e["phi"], "experiment.phi");
    if (e.contains("ys")) x.ys = field_table(e["ys"], "experiment.ys", n, true);
  }

  // Mode requirements.
  const auto& x = c.experiment;
  if (c.mode == "weierstrass") {
    if (x.slice.empty()) throw ConfigError("experiment.slice", "required for weierstrass mode");
    if (x.t_values.empty()) throw ConfigError("experiment.t_values", "required for weierstrass mode");
  } else if (c.mode == "concentration") {
    if (!x.mask_A) throw ConfigError("experiment.masks.A", "required for concentration mode");
    if (x.eps_values.empty()) throw ConfigError("experiment.eps_values", "required for concentration mode");
    if (x.eigen_probes + x.random_probes < 20) throw ConfigError("experiment.probes", "at least 20 probes are required");
  } else if (c.mode == "glaeser") {
    if (x.zero_set.has_value() == x.cloud.has_value())
      throw ConfigError("experiment.zero_set", "glaeser mode needs exactly one of experiment.zero_set and experiment.cloud");
    if (x.cloud && !(x.scale > 0)) throw ConfigError("experiment.scale", "required with experiment.cloud");
  } else if (c.mode == "amano") {
    if (!x.phi) throw ConfigError("experiment.phi", "required for amano mode");
    if (x.ys.empty()) throw ConfigError("experiment.ys", "required for amano mode");
  }

  // Parse every expression up front so errors name the field.
  if (is_poly_mode(c.mode)) {
    poly_system(c.variables, c.fields, "fields");
    if (c.mode == "amano") {
      poly_expr(*x.phi, c.variables, "experiment.phi");
      poly_system(c.variables, x.ys, "experiment.ys");
    }
  } else {
    smooth_system(c.variables, c.fields);
    if (c.density) smooth_expr(*c.density, c.variables, "density");
    if (x.mask_A) smooth_expr(*x.mask_A, c.variables, "experiment.masks.A");
    if (x.zero_set) smooth_expr(*x.zero_set, c.variables, "experiment.zero_set");
  }
  return c;
}

Json JobConfig::to_json() const {
  Json j;
  j["mode"] = mode;
  j["dimension"] = variables.size();
  j["variables"] = variables;
  j["fields"] = fields;
  j["s"] = s;
  j["seed"] = seed;
  j["budget"] = budget;
  j["search_box"] = {{"radius", search_box.radius},
                     {"grid_per_axis", search_box.grid_per_axis},
                     {"tol_witness", search_box.tol_witness}};
  j["grid"] = {{"N", grid.N}, {"m_eigs", grid.m_eigs}, {"resolutions", grid.resolutions}};
  if (density) j["density"] = *density;
  Json e;
  e["t_values"] = experiment.t_values;
  e["eps_values"] = experiment.eps_values;
  e["slice"] = experiment.slice;
  Json masks = {{"tol", experiment.mask_tol}, {"V_radius", experiment.V_radius}, {"delta", experiment.delta}};
  if (experiment.mask_A) masks["A"] = *experiment.mask_A;
  e["masks"] = masks;
  e["probes"] = {{"eigen", experiment.eigen_probes}, {"random", experiment.random_probes}};
  if (experiment.zero_set) e["zero_set"] = *experiment.zero_set;
  if (experiment.cloud) e["cloud"] = *experiment.cloud;
  if (experiment.scale > 0) e["scale"] = experiment.scale;
  e["metric"] = experiment.metric;
  e["theta_char_deg"] = experiment.theta_char_deg;
  e["max_k"] = experiment.max_k;
  if (experiment.phi) e["phi"] = *experiment.phi;
  e["ys"] = experiment.ys;
  j["experiment"] = e;
  return j;
}

Json run_job(const JobConfig& config, bool with_timings) {
  const auto t0 = std::chrono::steady_clock::now();
  Json report;
  report["schema_version"] = kSchemaVersion;
  report["config"] = config.to_json();
  report["verdict"] = numeric_verdict();
  report["chain"] = Json::array();
  report["warnings"] = Json::array();
  report["timings"] = Json::object();
  report["tables"] = Json::object();
  report["results"] = Json::object();
  try {
    if (config.mode == "analyze") run_analyze(config, report);
    else if (config.mode == "amano") run_amano(config, report);
    else if (config.mode == "spectrum") run_spectrum(config, report);
    else if (config.mode == "weierstrass") run_weierstrass(config, report);
    else if (config.mode == "concentration") run_concentration(config, report);
    else if (config.mode == "glaeser") run_glaeser(config, report);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    report["error"] = {{"type", error_type(e)}, {"message", e.what()}};
    report["verdict"] = {{"tag", "unknown"}, {"reason", "engine error"}, {"clause", nullptr}, {"certificate", nullptr}};
  }
  if (with_timings)
    report["timings"]["total_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

bool report_has_error(const Json& report) { return report.contains("error"); }

std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

std::string table_to_csv(const Json& t) {
  std::ostringstream os;
  const auto& header = t.at("header");
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i].get<std::string>();
  os << "\n";
  for (const auto& row : t.at("rows")) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ",";
      const auto& v = row[i];
      if (v.is_number_integer()) os << v.dump();
      else if (v.is_number()) os << format_double(v.get<double>());
      else if (v.is_string()) os << v.get<std::string>();
      else os << v.dump();
    }
    os << "\n";
  }
  return os.str();
}

std::vector<std::filesystem::path> emit_report(const Json& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw Error("cannot write " + p.string());
    written.push_back(p);
  };
  write(dir / "report.json", dump_report(report));
  if (report.contains("tables"))
    for (auto it = report["tables"].begin(); it != report["tables"].end(); ++it)
      write(dir / (it.key() + ".csv"), table_to_csv(it.value()));
  return written;
}

std::vector<std::vector<double>> read_cloud_csv(const std::string& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("experiment.cloud", "cannot open '" + path + "'");
  std::vector<std::vector<double>> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      cell = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
      double v = 0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (pts.empty() && lineno == 1) continue;  // header
      throw ConfigError("experiment.cloud", path + ":" + std::to_string(lineno) + ": non-numeric cell");
    }
    if (row.size() < n)
      throw ConfigError("experiment.cloud", path + ":" + std::to_string(lineno) + ": expected " + std::to_string(n) + " columns");
    row.resize(n);
    pts.push_back(std::move(row));
  }
  return pts;
}

}  // namespace charflow
