#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace charflow {

using Json = nlohmann::json;

inline constexpr const char* kModes[] = {"analyze", "spectrum", "weierstrass", "concentration", "glaeser", "amano"};

/// Validated job configuration. Every field has a default except the ones a
/// mode requires; `to_json` emits the fully defaulted form, which re-runs to
/// the same report.
struct JobConfig {
  std::string mode;
  std::vector<std::string> variables;
  std::vector<std::vector<std::string>> fields;
  std::size_t s = 1;
  std::uint64_t seed = 0;
  std::size_t budget = 200000;

  struct SearchBoxCfg {
    std::string radius = "2";
    std::size_t grid_per_axis = 21;
    double tol_witness = 1e-18;
  } search_box;

  struct GridCfg {
    std::size_t N = 64;
    std::size_t m_eigs = 5;
    /// spectrum mode; defaults to {N}.
    std::vector<std::size_t> resolutions;
  } grid;

  std::optional<std::string> density;

  struct ExperimentCfg {
    std::vector<double> t_values;
    std::vector<double> eps_values;
    std::vector<std::string> slice;
    /// Zero set of the marked set A (concentration) or of the localization set (spectrum).
    std::optional<std::string> mask_A;
    double mask_tol = 1e-9;
    double V_radius = 1.0;
    double delta = 0.5;
    std::size_t eigen_probes = 10;
    std::size_t random_probes = 20;
    // glaeser
    std::optional<std::string> zero_set;
    std::optional<std::string> cloud;
    double scale = 0.0;
    std::string metric = "euclidean";
    double theta_char_deg = 5.0;
    std::size_t max_k = 0;
    // amano
    std::optional<std::string> phi;
    std::vector<std::vector<std::string>> ys;
  } experiment;

  /// Output directory; not part of the echoed configuration.
  std::string output = "out";

  /// Parses and validates; throws ConfigError naming the offending field path.
  static JobConfig from_json(const Json& j);
  Json to_json() const;
};

/// Runs the job and returns the report. Engine failures are recorded under
/// `error` instead of being thrown; config problems throw ConfigError.
Json run_job(const JobConfig& config, bool with_timings = false);

/// True when the report carries an engine error.
bool report_has_error(const Json& report);

/// Writes report.json and the mode's CSV tables into `dir`; returns the
/// written paths. Identical reports give byte-identical files.
std::vector<std::filesystem::path> emit_report(const Json& report, const std::filesystem::path& dir);

/// The report serialization used for report.json.
std::string dump_report(const Json& report);

/// Renders one table ({header, rows}) as CSV text.
std::string table_to_csv(const Json& table);

/// Reads a point cloud CSV (optional header line, n numeric columns).
std::vector<std::vector<double>> read_cloud_csv(const std::string& path, std::size_t n);

}  // namespace charflow
