#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "umbilic/cli.hpp"
#include "umbilic/torussearch.hpp"

using namespace umbilic;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "umbilic_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::IoError;
}

json torus_config(const std::string& op) {
  json doc = json::parse(R"({
    "surface": {"torus": {"omega": [0.3, 1.1]}},
    "metric": {"modes": [{"j": 1, "k": 0, "re": 0.15, "im": 0.0},
                         {"j": 0, "k": 1, "re": 0.0, "im": -0.1},
                         {"j": 1, "k": 1, "re": 0.05, "im": 0.02}]},
    "numeric": {"grid_n": 128}
  })");
  doc["operation"] = op;
  return doc;
}

json masked_stats(const ChartGrid& f) {
  double sup = 0.0, mean = 0.0;
  std::size_t count = 0;
  for (int i = 0; i < f.n(); ++i)
    for (int j = 0; j < f.n(); ++j)
      if (f.in_mask(i, j)) {
        sup = std::max(sup, std::abs(f.at(i, j)));
        mean += std::abs(f.at(i, j));
        ++count;
      }
  return {{"samples", count}, {"sup_norm", sup}, {"mean_modulus", mean / static_cast<double>(count)}};
}

}  // namespace

TEST_CASE("constant torus potential: r vanishes and the metric is spherical") {
  const json doc = json::parse(
      R"({"surface": {"torus": {"omega": [0, 1]}}, "metric": {"builtin": {"name": "constant"}}, "operation": "invariant"})");
  const json rep = run(parse_config(doc));
  CHECK(rep["results"]["r"]["sup_norm"].get<double>() <= 1e-10);
  CHECK(rep["results"]["spherical_test"].get<bool>());
  CHECK(rep["version"] == kVersion);
  CHECK(rep["diagnostics"].contains("wall_time"));
}

TEST_CASE("sphere ph-audit") {
  const json doc = json::parse(R"({
    "surface": {"sphere": {"degree": 2, "perturbations": [{"harmonic": "re", "epsilon": 0.05}]}},
    "operation": "ph-audit"})");
  const json res = run(parse_config(doc))["results"];
  CHECK(res["audit"]["sum_twice_index"] == 4);
  CHECK(res["audit"]["pass"].get<bool>());
  for (const auto& r : res["records"]) CHECK(r["index"].get<double>() * 2 == r["twice_index"].get<int>());
}

TEST_CASE("loewner report embeds the coefficient table") {
  const json doc = json::parse(R"({"operation": "loewner", "loewner": {"g": "zbar", "order": 8}})");
  const json res = run(parse_config(doc))["results"];
  CHECK(res["residual"].get<double>() <= 1e-12);
  CHECK(res["f"].is_array());
  CHECK_FALSE(res["f"].empty());
  bool has_z = false;
  for (const auto& c : res["f"])
    if (c["k"] == 1 && c["l"] == 0) has_z = c["re"] == 1.0;
  CHECK(has_z);
}

TEST_CASE("echoed configs re-validate and reproduce the results") {
  for (const std::string op : {"invariant", "umbilics", "ph-audit", "obstruction"}) {
    json doc = torus_config(op);
    if (op == "obstruction") {
      doc["metric"] = json::parse(R"({"modes": [{"j": 1, "k": 0, "re": 0.2, "im": 0.0}]})");
      doc["obstruction"] = {{"direction", {{"lattice", {1, 0}}}}};
    }
    const RunConfig c = parse_config(doc);
    const json first = run(c);
    const RunConfig echoed = parse_config(first["config"]);
    CHECK(config_to_json(echoed) == first["config"]);
    const json second = run(echoed);
    CHECK(second["results"] == first["results"]);
  }
}

TEST_CASE("search reports are reproducible") {
  json doc = json::parse(R"({"surface": {"torus": {"omega": [0, 1]}}, "operation": "search",
                            "numeric": {"seed": 7},
                            "search": {"budget": 1, "trials": 2, "evaluations": 15}})");
  const json a = run(parse_config(doc));
  const json b = run(parse_config(a["config"]));
  CHECK(a["results"] == b["results"]);
  CHECK(a["results"]["history"].size() == 30);
  CHECK(a["results"]["seed"] == 7);
}

TEST_CASE("invalid configs are rejected") {
  const json good = torus_config("invariant");
  auto with = [&](const std::function<void(json&)>& edit) {
    json d = good;
    edit(d);
    return kind_of([&] { parse_config(d); });
  };
  CHECK(with([](json&) {}) == ErrorKind::IoError);  // nothing thrown
  CHECK(with([](json& d) { d["numeric"]["grid_n"] = 63; }) == ErrorKind::ConfigError);
  CHECK(with([](json& d) { d["numeric"]["grid_n"] = 32; }) == ErrorKind::ConfigError);
  CHECK(with([](json& d) { d["numeric"]["tolerances"] = {{"zero_floor", -1e-9}}; }) == ErrorKind::ConfigError);
  CHECK(with([](json& d) { d["numeric"]["tolerances"] = {{"spherical", 0.0}}; }) == ErrorKind::ConfigError);
  CHECK(with([](json& d) { d["surface"]["chart"] = {{"radius", 1.0}}; }) == ErrorKind::ConfigError);
  CHECK(with([](json& d) { d["metric"]["builtin"] = {{"name", "constant"}}; }) == ErrorKind::ConfigError);
  CHECK(with([](json& d) { d.erase("metric"); }) == ErrorKind::ConfigError);
  CHECK(with([](json& d) { d["operation"] = "plot"; }) == ErrorKind::ConfigError);
  CHECK(with([](json& d) { d["colour"] = "red"; }) == ErrorKind::ConfigError);
  CHECK(with([](json& d) { d["surface"]["torus"]["omega"] = {1.0, 0.0}; }) == ErrorKind::ConfigError);
  CHECK(with([](json& d) { d["operation"] = "ph-audit"; d["surface"] = {{"chart", {{"radius", 1.0}}}}; }) ==
        ErrorKind::ConfigError);
}

TEST_CASE("numerical faults map to their error kinds") {
  const json not_convex = json::parse(R"({"surface": {"chart": {"radius": 0.5}}, "operation": "invariant",
      "metric": {"builtin": {"name": "gaussian_bundle", "params": {"sign": -1}}}})");
  CHECK(kind_of([&] { run(parse_config(not_convex)); }) == ErrorKind::NotPseudoconvex);
  const json flat = json::parse(R"({"surface": {"torus": {"omega": [0, 1]}}, "operation": "umbilics",
      "metric": {"builtin": {"name": "constant"}}})");
  CHECK(kind_of([&] { run(parse_config(flat)); }) == ErrorKind::TotallyDegenerate);
  const json round = json::parse(R"({"surface": {"sphere": {"degree": 1}}, "operation": "umbilics"})");
  CHECK(kind_of([&] { run(parse_config(round)); }) == ErrorKind::TotallyDegenerate);

  const json err = error_object(ErrorKind::SolveFailed, "x");
  CHECK(err["error"]["kind"] == "SolveFailed");
  CHECK(err["error"]["exit_code"] == exit_code(ErrorKind::SolveFailed));
}

TEST_CASE("every error kind has its own nonzero exit code") {
  std::set<int> codes;
  const ErrorKind all[] = {ErrorKind::InvalidArgument, ErrorKind::ConfigError,       ErrorKind::NotPseudoconvex,
                           ErrorKind::TotallyDegenerate, ErrorKind::SolveFailed,     ErrorKind::UnderResolved,
                           ErrorKind::ZeroOnContour,   ErrorKind::PhaseStepTooLarge, ErrorKind::DomainError,
                           ErrorKind::TransitionSingular, ErrorKind::SymmetryViolated, ErrorKind::FormDisagreement,
                           ErrorKind::IoError};
  for (ErrorKind k : all) {
    CHECK(exit_code(k) != 0);
    codes.insert(exit_code(k));
  }
  CHECK(codes.size() == std::size(all));
}

TEST_CASE("grid dumps") {
  const TorusLattice lat(cplx(0, 1));
  auto one = PeriodicField::constant(lat, 8, 1.0);
  const fs::path p = scratch("one.csv");
  dump_grid(one, p.string());
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  CHECK(line == "s,t,re,im");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.substr(line.size() - 4) == ",1,0");
  }
  CHECK(rows == 64);

  auto wavy = PeriodicField::from_function(lat, 16, [](double s, double t) { return cplx(std::sin(7 * s) / 3, t * t); }, false);
  const fs::path q = scratch("wavy.csv");
  dump_grid(wavy, q.string());
  const PeriodicField back = load_periodic_grid(q.string(), lat, false);
  REQUIRE(back.n() == 16);
  for (std::size_t k = 0; k < wavy.values().size(); ++k) CHECK(back.values()[k] == wavy.values()[k]);

  const ChartGrid chart = ChartGrid::from_function("z", 1.3, 21, [](cplx z) { return std::exp(z) / 7.0; });
  const fs::path r = scratch("chart.csv");
  dump_grid(chart, r.string());
  const ChartGrid cback = load_chart_grid(r.string(), "z", false);
  REQUIRE(cback.n() == 21);
  CHECK(cback.radius() == chart.radius());
  for (std::size_t k = 0; k < chart.values().size(); ++k) CHECK(cback.values()[k] == chart.values()[k]);

  CHECK(kind_of([] { load_chart_grid("/nonexistent/grid.csv", "z", false); }) == ErrorKind::IoError);
}

TEST_CASE("sphere r dump matches the statistics of the same run") {
  json doc = json::parse(R"({
    "surface": {"sphere": {"degree": 2, "perturbations": [{"harmonic": "re", "epsilon": 0.05}]}},
    "operation": "invariant"})");
  doc["output"] = {{"grid_dump", scratch("sphere_r.csv").string()}};
  const json rep = run(parse_config(doc));
  const ChartGrid r = load_chart_grid(scratch("sphere_r.csv").string(), "z", false);
  const json stats = masked_stats(r);
  const json& mem = rep["results"]["charts"]["z"]["r"];
  CHECK(stats["samples"] == mem["samples"]);
  CHECK(stats["sup_norm"].get<double>() == mem["sup_norm"].get<double>());
  CHECK(stats["mean_modulus"].get<double>() == doctest::Approx(mem["mean_modulus"].get<double>()).epsilon(1e-14));
}

TEST_CASE("sampled potentials reproduce the Fourier-mode run") {
  const json modes_doc = torus_config("invariant");
  const json mrep = run(parse_config(modes_doc));

  TrigPotential u(TorusLattice(cplx(0.3, 1.1)), 1);
  u.set_mode(1, 0, 0.15);
  u.set_mode(0, 1, cplx(0.0, -0.1));
  u.set_mode(1, 1, cplx(0.05, 0.02));
  const fs::path up = scratch("u.csv");
  dump_grid(u.sample(128), up.string());

  json doc = modes_doc;
  doc["metric"] = {{"samples", {{"path", up.string()}, {"kind", "potential_u"}}}};
  const json srep = run(parse_config(doc));
  CHECK(srep["results"]["r"] == mrep["results"]["r"]);
  CHECK(mrep["results"]["r"]["sup_norm"].get<double>() > 0.0);
}
