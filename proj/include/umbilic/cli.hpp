#pragma once

// Configuration-driven front end: JSON run configs, structured reports, and
// plain-text grid dumps.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "umbilic/chart_grid.hpp"
#include "umbilic/errors.hpp"
#include "umbilic/index.hpp"
#include "umbilic/loewner.hpp"
#include "umbilic/periodic_field.hpp"

namespace umbilic {

using json = nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

struct ModeSpec {
  int j;
  int k;
  cplx c;
};

struct RunConfig {
  enum class Surface { torus, sphere, chart };
  enum class MetricSource { none, builtin, modes, samples };

  Surface surface = Surface::torus;
  cplx omega{0.0, 1.0};
  SphereMetricSpec sphere;
  double chart_radius = 1.0;

  MetricSource metric = MetricSource::none;
  std::string builtin_name;
  json builtin_params = json::object();
  std::vector<ModeSpec> modes;
  std::string samples_path;
  /// "potential_u" or "metric_h" (what the samples or builtin describe).
  std::string metric_kind = "potential_u";

  std::string operation;

  int grid_n = 128;
  std::uint64_t seed = 42;
  std::string form = "p_form";
  double zero_floor = 1e-9;
  double form_agreement = 1e-7;
  double spherical = 1e-9;

  std::string report_path;
  std::string grid_dump_path;

  json loewner_g = "zero";
  int loewner_order = 8;
  LoewnerNormalization loewner_norm;

  int search_budget = 3;
  int search_trials = 4;
  int search_evaluations = 100;
  int search_grid_n = 64;
  bool search_s_only = false;
  double search_bound = 1.0;

  std::optional<std::pair<int, int>> obstruction_lattice_direction;
  std::optional<std::pair<double, double>> obstruction_vector;
};

/// Validates and normalizes a config document; throws ConfigError.
RunConfig parse_config(const json& doc);
/// Canonical form of a config; parse_config(config_to_json(c)) reproduces c.
json config_to_json(const RunConfig& config);

/// Runs the configured operation and returns the report (config echo,
/// version, results, diagnostics). Writes the report and grid dump when
/// paths are configured. Throws umbilic::Error on failure.
json run(const RunConfig& config);

/// Machine-readable error object with its exit code.
json error_object(ErrorKind kind, const std::string& message);

/// Delimited text table: header "s,t,re,im" (torus) or "x,y,re,im" (chart),
/// rows with the t (or y) index outermost, 17 significant digits.
void dump_grid(const PeriodicField& field, const std::string& path);
void dump_grid(const ChartGrid& field, const std::string& path);

PeriodicField load_periodic_grid(const std::string& path, const TorusLattice& lattice, bool real_tag);
ChartGrid load_chart_grid(const std::string& path, const std::string& chart_id, bool real_tag);

json record_to_json(const UmbilicRecord& record);

}  // namespace umbilic
