// Command-line entry point: one subcommand per operation, each driven by a
// JSON config file.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "umbilic/cli.hpp"

namespace {

using umbilic::json;

struct Overrides {
  std::string config_path;
  std::optional<int> grid_n;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

int emit_error(umbilic::ErrorKind kind, const std::string& message, const std::string& report_path) {
  const json err = umbilic::error_object(kind, message);
  std::cerr << err.dump(2) << '\n';
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (out) out << err.dump(2) << '\n';
  }
  return umbilic::exit_code(kind);
}

int run_subcommand(const std::string& operation, const Overrides& o) {
  std::string report_path = o.out.value_or("");
  try {
    std::ifstream in(o.config_path);
    if (!in) umbilic::fail(umbilic::ErrorKind::IoError, "cannot open config " + o.config_path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      umbilic::fail(umbilic::ErrorKind::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) umbilic::fail(umbilic::ErrorKind::ConfigError, "config must be a JSON object");
    if (doc.contains("operation") && doc["operation"] != operation)
      umbilic::fail(umbilic::ErrorKind::ConfigError,
                    "config operation '" + doc["operation"].dump() + "' does not match subcommand " + operation);
    doc["operation"] = operation;
    if (o.seed) doc["numeric"]["seed"] = *o.seed;
    if (o.grid_n) {
      if (operation == "search") doc["search"]["grid_n"] = *o.grid_n;
      else doc["numeric"]["grid_n"] = *o.grid_n;
    }
    if (o.out) doc["output"]["report"] = *o.out;
    if (report_path.empty() && doc.contains("output") && doc["output"].contains("report") &&
        doc["output"]["report"].is_string())
      report_path = doc["output"]["report"].get<std::string>();

    const umbilic::RunConfig config = umbilic::parse_config(doc);
    const json report = umbilic::run(config);
    if (config.report_path.empty()) std::cout << report.dump(2) << '\n';
    return 0;
  } catch (const umbilic::Error& e) {
    return emit_error(e.kind(), e.what(), report_path);
  } catch (const json::exception& e) {
    return emit_error(umbilic::ErrorKind::ConfigError, e.what(), report_path);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Umbilical locus of circle bundles over Riemann surfaces"};
  app.set_version_flag("--version", std::string(umbilic::kVersion));
  app.require_subcommand(1);

  Overrides overrides;
  std::string chosen;
  for (const char* name : {"invariant", "umbilics", "ph-audit", "loewner", "search", "obstruction"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", overrides.config_path, "JSON run config")->required()->check(CLI::ExistingFile);
    sub->add_option("--grid-n", overrides.grid_n, "override the grid size");
    sub->add_option("--seed", overrides.seed, "override the random seed");
    sub->add_option("--out", overrides.out, "report path (default: stdout)");
    sub->callback([&chosen, name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : umbilic::exit_code(umbilic::ErrorKind::ConfigError);
  }
  return run_subcommand(chosen, overrides);
}
