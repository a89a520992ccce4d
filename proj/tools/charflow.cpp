// charflow command-line driver: one subcommand per job mode.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "charflow/errors.hpp"
#include "charflow/job.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEngine = 1;
constexpr int kExitConfig = 2;

struct Args {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> budget;
  bool timings = false;
};

charflow::Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw charflow::ConfigError("--config", "cannot open '" + path + "'");
  try {
    return charflow::Json::parse(in);
  } catch (const charflow::Json::parse_error& e) {
    throw charflow::ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
}

int run(const std::string& mode, const Args& args) {
  charflow::JobConfig cfg;
  try {
    auto j = load_json(args.config);
    if (!j.is_object()) throw charflow::ConfigError("<root>", "expected an object");
    if (!j.contains("mode")) j["mode"] = mode;
    if (j["mode"] != mode) {
      const auto given = j["mode"].is_string() ? j["mode"].get<std::string>() : j["mode"].dump();
      throw charflow::ConfigError("mode", "config is for '" + given + "' but the subcommand is '" + mode + "'");
    }
    if (args.seed) j["seed"] = *args.seed;
    if (args.budget) j["budget"] = *args.budget;
    cfg = charflow::JobConfig::from_json(j);
  } catch (const charflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (!args.out.empty()) cfg.output = args.out;

  charflow::Json report;
  try {
    report = charflow::run_job(cfg, args.timings);
  } catch (const charflow::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
  try {
    for (const auto& p : charflow::emit_report(report, cfg.output)) std::cout << "wrote " << p.string() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEngine;
  }
  if (charflow::report_has_error(report)) {
    std::cerr << "engine error (" << report["error"]["type"].get<std::string>()
              << "): " << report["error"]["message"].get<std::string>() << "\n";
    return kExitEngine;
  }
  std::cout << "verdict: " << report["verdict"]["tag"].get<std::string>() << "\n";
  for (const auto& w : report["warnings"]) std::cout << "warning: " << w.get<std::string>() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"charflow: characteristic chains and torus experiments for vector-field systems"};
  app.require_subcommand(1);
  Args args;
  std::string chosen;
  for (const char* mode : charflow::kModes) {
    auto* sub = app.add_subcommand(mode, std::string("run a ") + mode + " job");
    sub->add_option("--config", args.config, "job configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", args.out, "output directory (overrides the config)");
    sub->add_option("--seed", args.seed, "random seed (overrides the config)");
    sub->add_option("--budget", args.budget, "S-pair budget for Groebner computations (overrides the config)");
    sub->add_flag("--timings", args.timings, "record wall-clock timings in the report");
    sub->callback([&chosen, mode] { chosen = mode; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }
  return run(chosen, args);
}
