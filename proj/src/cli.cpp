#include "umbilic/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <array>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "umbilic/cartan.hpp"
#include "umbilic/torussearch.hpp"

namespace umbilic {

namespace {

[[noreturn]] void config_fail(const std::string& where, const std::string& what) {
  fail(ErrorKind::ConfigError, where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) config_fail(where, "expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items())
    if (!ok.count(key)) config_fail(where, "unknown field '" + key + "'");
}

const json& single_variant(const json& obj, const std::string& where) {
  if (!obj.is_object() || obj.size() != 1) config_fail(where, "expected exactly one entry");
  return obj.begin().value();
}

double get_number(const json& obj, const char* key, const std::string& where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) config_fail(where, std::string("'") + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) config_fail(where, std::string("'") + key + "' must be finite");
  return x;
}

int get_int(const json& obj, const char* key, const std::string& where, int fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) config_fail(where, std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

bool get_bool(const json& obj, const char* key, const std::string& where, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) config_fail(where, std::string("'") + key + "' must be a boolean");
  return v.get<bool>();
}

std::string get_string(const json& obj, const char* key, const std::string& where, std::string fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) config_fail(where, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

cplx get_complex_pair(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    config_fail(where, "expected [re, im]");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<double> get_double_list(const json& obj, const char* key, const std::string& where) {
  std::vector<double> out;
  if (!obj.contains(key)) return out;
  const json& v = obj.at(key);
  if (!v.is_array()) config_fail(where, std::string("'") + key + "' must be an array");
  for (const auto& x : v) {
    if (!x.is_number()) config_fail(where, std::string("'") + key + "' entries must be numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

const std::set<std::string> kOperations = {"invariant", "umbilics", "ph-audit", "loewner", "search", "obstruction"};
const std::set<std::string> kHarmonics = {"re", "im", "height", "re2"};

void parse_surface(const json& doc, RunConfig& c) {
  if (!doc.contains("surface")) config_fail("surface", "missing");
  const json& s = doc.at("surface");
  const json& body = single_variant(s, "surface");
  const std::string kind = s.begin().key();
  if (kind == "torus") {
    only_keys(body, "surface.torus", {"omega"});
    c.surface = RunConfig::Surface::torus;
    if (body.contains("omega")) c.omega = get_complex_pair(body.at("omega"), "surface.torus.omega");
    if (c.omega.imag() == 0.0) config_fail("surface.torus.omega", "Im(omega) must be nonzero");
  } else if (kind == "sphere") {
    only_keys(body, "surface.sphere", {"degree", "perturbations"});
    c.surface = RunConfig::Surface::sphere;
    c.sphere.degree = get_number(body, "degree", "surface.sphere", 1.0);
    if (!(c.sphere.degree > 0.0)) config_fail("surface.sphere.degree", "must be positive");
    if (body.contains("perturbations")) {
      const json& list = body.at("perturbations");
      if (!list.is_array()) config_fail("surface.sphere.perturbations", "must be an array");
      for (const auto& p : list) {
        only_keys(p, "surface.sphere.perturbations[]", {"harmonic", "epsilon"});
        SpherePerturbation sp{get_string(p, "harmonic", "surface.sphere.perturbations[]", ""),
                              get_number(p, "epsilon", "surface.sphere.perturbations[]", 0.0)};
        if (!kHarmonics.count(sp.harmonic))
          config_fail("surface.sphere.perturbations[]", "harmonic must be one of re, im, height, re2");
        c.sphere.perturbations.push_back(sp);
      }
    }
  } else if (kind == "chart") {
    only_keys(body, "surface.chart", {"radius"});
    c.surface = RunConfig::Surface::chart;
    c.chart_radius = get_number(body, "radius", "surface.chart", 1.0);
    if (!(c.chart_radius > 0.0)) config_fail("surface.chart.radius", "must be positive");
  } else {
    config_fail("surface", "unknown surface '" + kind + "'");
  }
}

void parse_metric(const json& doc, RunConfig& c) {
  if (!doc.contains("metric")) return;
  const json& m = doc.at("metric");
  const json& body = single_variant(m, "metric");
  const std::string kind = m.begin().key();
  if (kind == "builtin") {
    only_keys(body, "metric.builtin", {"name", "params"});
    c.metric = RunConfig::MetricSource::builtin;
    c.builtin_name = get_string(body, "name", "metric.builtin", "");
    if (body.contains("params")) {
      if (!body.at("params").is_object()) config_fail("metric.builtin.params", "must be an object");
      c.builtin_params = body.at("params");
    }
  } else if (kind == "modes") {
    c.metric = RunConfig::MetricSource::modes;
    if (!body.is_array()) config_fail("metric.modes", "must be an array");
    for (const auto& e : body) {
      only_keys(e, "metric.modes[]", {"j", "k", "re", "im"});
      c.modes.push_back({get_int(e, "j", "metric.modes[]", 0), get_int(e, "k", "metric.modes[]", 0),
                         {get_number(e, "re", "metric.modes[]", 0.0), get_number(e, "im", "metric.modes[]", 0.0)}});
    }
  } else if (kind == "samples") {
    only_keys(body, "metric.samples", {"path", "kind"});
    c.metric = RunConfig::MetricSource::samples;
    c.samples_path = get_string(body, "path", "metric.samples", "");
    c.metric_kind = get_string(body, "kind", "metric.samples", "potential_u");
    if (c.samples_path.empty()) config_fail("metric.samples.path", "missing");
    if (c.metric_kind != "potential_u" && c.metric_kind != "metric_h")
      config_fail("metric.samples.kind", "must be potential_u or metric_h");
  } else {
    config_fail("metric", "unknown metric source '" + kind + "'");
  }
}

void parse_numeric(const json& doc, RunConfig& c) {
  if (!doc.contains("numeric")) return;
  const json& n = doc.at("numeric");
  only_keys(n, "numeric", {"grid_n", "seed", "form", "tolerances"});
  c.grid_n = get_int(n, "grid_n", "numeric", c.grid_n);
  if (n.contains("seed")) {
    if (!n.at("seed").is_number_unsigned()) config_fail("numeric.seed", "must be a non-negative integer");
    c.seed = n.at("seed").get<std::uint64_t>();
  }
  c.form = get_string(n, "form", "numeric", c.form);
  if (n.contains("tolerances")) {
    const json& t = n.at("tolerances");
    only_keys(t, "numeric.tolerances", {"zero_floor", "form_agreement", "spherical"});
    c.zero_floor = get_number(t, "zero_floor", "numeric.tolerances", c.zero_floor);
    c.form_agreement = get_number(t, "form_agreement", "numeric.tolerances", c.form_agreement);
    c.spherical = get_number(t, "spherical", "numeric.tolerances", c.spherical);
  }
}

void parse_output(const json& doc, RunConfig& c) {
  if (!doc.contains("output")) return;
  const json& o = doc.at("output");
  only_keys(o, "output", {"report", "grid_dump"});
  c.report_path = get_string(o, "report", "output", "");
  c.grid_dump_path = get_string(o, "grid_dump", "output", "");
}

void parse_loewner(const json& doc, RunConfig& c) {
  if (!doc.contains("loewner")) return;
  const json& l = doc.at("loewner");
  only_keys(l, "loewner", {"g", "order", "normalization"});
  if (l.contains("g")) c.loewner_g = l.at("g");
  c.loewner_order = get_int(l, "order", "loewner", c.loewner_order);
  if (l.contains("normalization")) {
    const json& n = l.at("normalization");
    only_keys(n, "loewner.normalization", {"f_diag", "phi_diag", "suppress_phi_harmonic"});
    c.loewner_norm.f_diag = get_double_list(n, "f_diag", "loewner.normalization");
    c.loewner_norm.phi_diag = get_double_list(n, "phi_diag", "loewner.normalization");
    c.loewner_norm.suppress_phi_harmonic =
        get_bool(n, "suppress_phi_harmonic", "loewner.normalization", c.loewner_norm.suppress_phi_harmonic);
  }
}

void parse_search(const json& doc, RunConfig& c) {
  if (!doc.contains("search")) return;
  const json& s = doc.at("search");
  only_keys(s, "search", {"budget", "trials", "evaluations", "grid_n", "s_only", "coefficient_bound"});
  c.search_budget = get_int(s, "budget", "search", c.search_budget);
  c.search_trials = get_int(s, "trials", "search", c.search_trials);
  c.search_evaluations = get_int(s, "evaluations", "search", c.search_evaluations);
  c.search_grid_n = get_int(s, "grid_n", "search", c.search_grid_n);
  c.search_s_only = get_bool(s, "s_only", "search", c.search_s_only);
  c.search_bound = get_number(s, "coefficient_bound", "search", c.search_bound);
}

void parse_obstruction(const json& doc, RunConfig& c) {
  if (!doc.contains("obstruction")) return;
  const json& o = doc.at("obstruction");
  only_keys(o, "obstruction", {"direction"});
  if (!o.contains("direction")) return;
  const json& d = o.at("direction");
  const json& body = single_variant(d, "obstruction.direction");
  const std::string kind = d.begin().key();
  if (!body.is_array() || body.size() != 2) config_fail("obstruction.direction", "expected a pair");
  if (kind == "lattice") {
    if (!body[0].is_number_integer() || !body[1].is_number_integer())
      config_fail("obstruction.direction.lattice", "expected integers [p, q]");
    c.obstruction_lattice_direction = std::make_pair(body[0].get<int>(), body[1].get<int>());
  } else if (kind == "vector") {
    if (!body[0].is_number() || !body[1].is_number())
      config_fail("obstruction.direction.vector", "expected numbers [alpha, beta]");
    c.obstruction_vector = std::make_pair(body[0].get<double>(), body[1].get<double>());
  } else {
    config_fail("obstruction.direction", "expected 'lattice' or 'vector'");
  }
}

void validate(const RunConfig& c) {
  using S = RunConfig::Surface;
  using M = RunConfig::MetricSource;
  if (!kOperations.count(c.operation)) config_fail("operation", "unknown operation '" + c.operation + "'");
  if (c.grid_n < 64 || c.grid_n % 2 != 0) config_fail("numeric.grid_n", "must be even and at least 64");
  for (double tol : {c.zero_floor, c.form_agreement, c.spherical})
    if (!(tol > 0.0)) config_fail("numeric.tolerances", "all tolerances must be positive");
  if (c.form != "q_form" && c.form != "p_form" && c.form != "divergence_form")
    config_fail("numeric.form", "must be q_form, p_form or divergence_form");

  const bool needs_metric = c.operation == "invariant" || c.operation == "umbilics" ||
                            c.operation == "ph-audit" || c.operation == "obstruction";
  if (c.surface == S::sphere) {
    if (c.metric != M::none && !(c.metric == M::builtin && c.builtin_name == "fubini_study"))
      config_fail("metric", "the sphere metric is given by the surface block (omit metric or use builtin fubini_study)");
  } else if (needs_metric && c.metric == M::none) {
    config_fail("metric", "missing");
  }

  if (c.metric == M::builtin) {
    static const std::set<std::string> torus_names = {"constant"};
    static const std::set<std::string> chart_names = {"constant", "fubini_study", "hyperbolic", "gaussian_bundle"};
    if (c.surface == S::torus && !torus_names.count(c.builtin_name))
      config_fail("metric.builtin.name", "torus builtins: constant");
    if (c.surface == S::chart && !chart_names.count(c.builtin_name))
      config_fail("metric.builtin.name", "chart builtins: constant, fubini_study, hyperbolic, gaussian_bundle");
  }
  if (c.metric == M::modes && c.surface != S::torus) config_fail("metric.modes", "Fourier modes need a torus");
  if (c.metric == M::samples && c.surface == S::sphere) config_fail("metric.samples", "not supported on the sphere");

  if (c.operation == "ph-audit" && c.surface == S::chart)
    config_fail("operation", "ph-audit needs a closed surface (torus or sphere)");
  if (c.operation == "search" && c.surface != S::torus) config_fail("operation", "search runs on a torus");
  if (c.operation == "obstruction") {
    if (c.surface != S::torus || c.metric != M::modes)
      config_fail("operation", "obstruction needs a torus with a Fourier-mode potential");
    if (c.obstruction_lattice_direction.has_value() == c.obstruction_vector.has_value())
      config_fail("obstruction.direction", "give exactly one of lattice or vector");
  }
  if (c.operation == "loewner") {
    if (c.loewner_order < 2) config_fail("loewner.order", "must be at least 2");
    if (!c.grid_dump_path.empty()) config_fail("output.grid_dump", "loewner produces no grid");
  }
  if (c.operation == "search") {
    if (c.search_budget < 1 || c.search_trials < 1 || c.search_evaluations < 1)
      config_fail("search", "budget, trials and evaluations must be positive");
    if (c.search_grid_n < 64 || c.search_grid_n % 2 != 0) config_fail("search.grid_n", "must be even and at least 64");
    if (!(c.search_bound > 0.0)) config_fail("search.coefficient_bound", "must be positive");
  }
}

json loewner_g_canonical(const json& g) {
  if (g.is_string()) {
    const std::string name = g.get<std::string>();
    if (name != "zero" && name != "z" && name != "zbar") config_fail("loewner.g", "named g must be zero, z or zbar");
    return g;
  }
  only_keys(g, "loewner.g", {"coefficients"});
  const json& list = g.contains("coefficients") ? g.at("coefficients") : json::array();
  if (!list.is_array()) config_fail("loewner.g.coefficients", "must be an array");
  json out = json::array();
  for (const auto& e : list) {
    only_keys(e, "loewner.g.coefficients[]", {"k", "l", "re", "im"});
    const int k = get_int(e, "k", "loewner.g.coefficients[]", 0);
    const int l = get_int(e, "l", "loewner.g.coefficients[]", 0);
    if (k < 0 || l < 0) config_fail("loewner.g.coefficients[]", "exponents must be non-negative");
    out.push_back({{"k", k},
                   {"l", l},
                   {"re", get_number(e, "re", "loewner.g.coefficients[]", 0.0)},
                   {"im", get_number(e, "im", "loewner.g.coefficients[]", 0.0)}});
  }
  return json{{"coefficients", out}};
}

}  // namespace

RunConfig parse_config(const json& doc) {
  only_keys(doc, "config", {"surface", "metric", "operation", "numeric", "output", "loewner", "search", "obstruction"});
  RunConfig c;
  if (!doc.contains("operation") || !doc.at("operation").is_string()) config_fail("operation", "missing");
  c.operation = doc.at("operation").get<std::string>();
  if (c.operation == "loewner" && !doc.contains("surface")) {
    c.surface = RunConfig::Surface::chart;
  } else {
    parse_surface(doc, c);
  }
  parse_metric(doc, c);
  parse_numeric(doc, c);
  parse_output(doc, c);
  parse_loewner(doc, c);
  c.loewner_g = loewner_g_canonical(c.loewner_g);
  parse_search(doc, c);
  parse_obstruction(doc, c);
  validate(c);
  return c;
}

json config_to_json(const RunConfig& c) {
  json doc;
  switch (c.surface) {
    case RunConfig::Surface::torus:
      doc["surface"] = {{"torus", {{"omega", {c.omega.real(), c.omega.imag()}}}}};
      break;
    case RunConfig::Surface::sphere: {
      json list = json::array();
      for (const auto& p : c.sphere.perturbations) list.push_back({{"harmonic", p.harmonic}, {"epsilon", p.epsilon}});
      doc["surface"] = {{"sphere", {{"degree", c.sphere.degree}, {"perturbations", list}}}};
      break;
    }
    case RunConfig::Surface::chart:
      doc["surface"] = {{"chart", {{"radius", c.chart_radius}}}};
      break;
  }
  switch (c.metric) {
    case RunConfig::MetricSource::none:
      break;
    case RunConfig::MetricSource::builtin:
      doc["metric"] = {{"builtin", {{"name", c.builtin_name}, {"params", c.builtin_params}}}};
      break;
    case RunConfig::MetricSource::modes: {
      json list = json::array();
      for (const auto& m : c.modes) list.push_back({{"j", m.j}, {"k", m.k}, {"re", m.c.real()}, {"im", m.c.imag()}});
      doc["metric"] = {{"modes", list}};
      break;
    }
    case RunConfig::MetricSource::samples:
      doc["metric"] = {{"samples", {{"path", c.samples_path}, {"kind", c.metric_kind}}}};
      break;
  }
  doc["operation"] = c.operation;
  doc["numeric"] = {{"grid_n", c.grid_n},
                    {"seed", c.seed},
                    {"form", c.form},
                    {"tolerances",
                     {{"zero_floor", c.zero_floor}, {"form_agreement", c.form_agreement}, {"spherical", c.spherical}}}};
  json out = json::object();
  if (!c.report_path.empty()) out["report"] = c.report_path;
  if (!c.grid_dump_path.empty()) out["grid_dump"] = c.grid_dump_path;
  doc["output"] = out;
  if (c.operation == "loewner")
    doc["loewner"] = {{"g", c.loewner_g},
                      {"order", c.loewner_order},
                      {"normalization",
                       {{"f_diag", c.loewner_norm.f_diag},
                        {"phi_diag", c.loewner_norm.phi_diag},
                        {"suppress_phi_harmonic", c.loewner_norm.suppress_phi_harmonic}}}};
  if (c.operation == "search")
    doc["search"] = {{"budget", c.search_budget},          {"trials", c.search_trials},
                     {"evaluations", c.search_evaluations}, {"grid_n", c.search_grid_n},
                     {"s_only", c.search_s_only},           {"coefficient_bound", c.search_bound}};
  if (c.operation == "obstruction") {
    if (c.obstruction_lattice_direction)
      doc["obstruction"] = {{"direction",
                             {{"lattice", {c.obstruction_lattice_direction->first,
                                           c.obstruction_lattice_direction->second}}}}};
    else if (c.obstruction_vector)
      doc["obstruction"] = {
          {"direction", {{"vector", {c.obstruction_vector->first, c.obstruction_vector->second}}}}};
  }
  return doc;
}

json error_object(ErrorKind kind, const std::string& message) {
  return {{"error", {{"kind", std::string(to_string(kind))}, {"message", message}, {"exit_code", exit_code(kind)}}}};
}

json record_to_json(const UmbilicRecord& r) {
  return {{"z0", {r.z0.real(), r.z0.imag()}},
          {"twice_index", r.twice_index},
          {"index", 0.5 * r.twice_index},
          {"residual", r.residual},
          {"chart_id", r.chart_id},
          {"contour_radius", r.contour_radius},
          {"cell_winding", r.cell_winding},
          {"degenerate", r.degenerate},
          {"chart_checked", r.chart_checked},
          {"chart_stable", r.chart_stable}};
}

// ---------------------------------------------------------------------------
// Grid files

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

struct GridRows {
  std::string header;
  std::vector<std::array<double, 4>> rows;
};

GridRows read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::IoError, "cannot open " + path);
  GridRows out;
  if (!std::getline(in, out.header)) fail(ErrorKind::IoError, path + ": empty file");
  if (!out.header.empty() && out.header.back() == '\r') out.header.pop_back();
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::array<double, 4> row{};
    std::istringstream ss(line);
    std::string cell;
    for (int c = 0; c < 4; ++c) {
      if (!std::getline(ss, cell, ',')) fail(ErrorKind::IoError, path + ": short row");
      try {
        row[c] = std::stod(cell);
      } catch (const std::exception&) {
        fail(ErrorKind::IoError, path + ": bad number '" + cell + "'");
      }
    }
    out.rows.push_back(row);
  }
  return out;
}

int square_side(std::size_t count, const std::string& path) {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(count))));
  if (n < 2 || static_cast<std::size_t>(n) * n != count) fail(ErrorKind::IoError, path + ": row count is not a square");
  return n;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::IoError, "cannot write " + path);
  out << text;
  if (!out) fail(ErrorKind::IoError, "write failed for " + path);
}

}  // namespace

void dump_grid(const PeriodicField& f, const std::string& path) {
  std::string text = "s,t,re,im\n";
  for (int i = 0; i < f.n(); ++i)
    for (int j = 0; j < f.n(); ++j) {
      const cplx v = f.at(i, j);
      text += fmt17(f.s_of(j)) + ',' + fmt17(f.t_of(i)) + ',' + fmt17(v.real()) + ',' + fmt17(v.imag()) + '\n';
    }
  write_file(path, text);
}

void dump_grid(const ChartGrid& f, const std::string& path) {
  std::string text = "x,y,re,im\n";
  for (int i = 0; i < f.n(); ++i)
    for (int j = 0; j < f.n(); ++j) {
      const cplx z = f.z_at(i, j);
      const cplx v = f.at(i, j);
      text += fmt17(z.real()) + ',' + fmt17(z.imag()) + ',' + fmt17(v.real()) + ',' + fmt17(v.imag()) + '\n';
    }
  write_file(path, text);
}

PeriodicField load_periodic_grid(const std::string& path, const TorusLattice& lattice, bool real_tag) {
  const GridRows g = read_rows(path);
  if (g.header != "s,t,re,im") fail(ErrorKind::IoError, path + ": expected header s,t,re,im");
  const int n = square_side(g.rows.size(), path);
  std::vector<cplx> values(g.rows.size());
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    const int i = static_cast<int>(r) / n, j = static_cast<int>(r) % n;
    if (std::abs(g.rows[r][0] - static_cast<double>(j) / n) > 1e-12 ||
        std::abs(g.rows[r][1] - static_cast<double>(i) / n) > 1e-12)
      fail(ErrorKind::IoError, path + ": rows are not on the expected lattice grid");
    values[r] = {g.rows[r][2], g.rows[r][3]};
  }
  return PeriodicField(lattice, n, std::move(values), real_tag);
}

ChartGrid load_chart_grid(const std::string& path, const std::string& chart_id, bool real_tag) {
  const GridRows g = read_rows(path);
  if (g.header != "x,y,re,im") fail(ErrorKind::IoError, path + ": expected header x,y,re,im");
  const int n = square_side(g.rows.size(), path);
  const double radius = -g.rows.front()[0];
  if (!(radius > 0.0)) fail(ErrorKind::IoError, path + ": first sample must sit at (-R, -R)");
  std::vector<cplx> values(g.rows.size());
  ChartGrid layout(chart_id, radius, n, std::vector<cplx>(g.rows.size()), real_tag);
  const double tol = 1e-12 * (1.0 + radius);
  for (std::size_t r = 0; r < g.rows.size(); ++r) {
    const cplx z = layout.z_at(static_cast<int>(r) / n, static_cast<int>(r) % n);
    if (std::abs(g.rows[r][0] - z.real()) > tol || std::abs(g.rows[r][1] - z.imag()) > tol)
      fail(ErrorKind::IoError, path + ": rows are not on the expected chart grid");
    values[r] = {g.rows[r][2], g.rows[r][3]};
  }
  return ChartGrid(chart_id, radius, n, std::move(values), real_tag);
}

// ---------------------------------------------------------------------------
// Pipelines

namespace {

json field_stats(std::span<const cplx> values) {
  double sup = 0.0, mean = 0.0, min_mod = std::numeric_limits<double>::infinity(), max_imag = 0.0;
  std::size_t count = 0;
  for (cplx v : values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) continue;
    const double a = std::abs(v);
    sup = std::max(sup, a);
    min_mod = std::min(min_mod, a);
    max_imag = std::max(max_imag, std::abs(v.imag()));
    mean += a;
    ++count;
  }
  if (count == 0) min_mod = 0.0;
  return {{"samples", count},
          {"sup_norm", sup},
          {"min_modulus", min_mod},
          {"mean_modulus", count ? mean / static_cast<double>(count) : 0.0},
          {"max_abs_imag", max_imag}};
}

json field_stats(const PeriodicField& f) { return field_stats(f.values()); }

json field_stats(const ChartGrid& f) {
  std::vector<cplx> masked;
  for (int i = 0; i < f.n(); ++i)
    for (int j = 0; j < f.n(); ++j)
      if (f.in_mask(i, j)) masked.push_back(f.at(i, j));
  return field_stats(masked);
}

json real_range(std::span<const cplx> values) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (cplx v : values) {
    lo = std::min(lo, v.real());
    hi = std::max(hi, v.real());
  }
  return {{"min", lo}, {"max", hi}};
}

json real_range(const ChartGrid& f) {
  std::vector<cplx> masked;
  for (int i = 0; i < f.n(); ++i)
    for (int j = 0; j < f.n(); ++j)
      if (f.in_mask(i, j)) masked.push_back(f.at(i, j));
  return real_range(masked);
}

json records_json(const std::vector<UmbilicRecord>& records) {
  json out = json::array();
  for (const auto& r : records) out.push_back(record_to_json(r));
  return out;
}

json audit_json(const AuditReport& a) {
  return {{"sum_twice_index", a.sum_twice_index}, {"expected", a.expected},   {"discrepancy", a.discrepancy},
          {"pass", a.pass},                       {"degenerate_records", a.degenerate_records}};
}

json modes_json(const TrigPotential& u) {
  json out = json::array();
  for (const auto& [jk, c] : u.stored_modes())
    out.push_back({{"j", jk.first}, {"k", jk.second}, {"re", c.real()}, {"im", c.imag()}});
  return out;
}

json series_table(const PowerSeries2& f) {
  json out = json::array();
  for (int d = 0; d <= f.max_degree(); ++d)
    for (int l = 0; l <= d; ++l) {
      const cplx c = f.coeff(d - l, l);
      if (c != cplx{}) out.push_back({{"k", d - l}, {"l", l}, {"re", c.real()}, {"im", c.imag()}});
    }
  return out;
}

TrigPotential potential_from_modes(const RunConfig& c) {
  int budget = 1;
  for (const auto& m : c.modes) budget = std::max({budget, std::abs(m.j), std::abs(m.k)});
  TrigPotential u(TorusLattice(c.omega), budget);
  for (const auto& m : c.modes) {
    if (m.j == 0 && m.k == 0 && m.c.imag() != 0.0)
      fail(ErrorKind::ConfigError, "metric.modes: the (0,0) coefficient must be real");
    u.set_mode(m.j, m.k, m.c);
  }
  return u;
}

double param(const RunConfig& c, const char* key, double fallback) {
  return get_number(c.builtin_params, key, "metric.builtin.params", fallback);
}

PeriodicField torus_potential(const RunConfig& c) {
  const TorusLattice lattice(c.omega);
  switch (c.metric) {
    case RunConfig::MetricSource::builtin: {
      PeriodicField u = PeriodicField::constant(lattice, c.grid_n, param(c, "value", 0.0));
      u.set_real_tag(true);
      return u;
    }
    case RunConfig::MetricSource::modes:
      return potential_from_modes(c).sample(c.grid_n);
    case RunConfig::MetricSource::samples: {
      const bool is_h = c.metric_kind == "metric_h";
      PeriodicField f = load_periodic_grid(c.samples_path, lattice, true);
      return is_h ? potential_from_metric(f) : f;
    }
    case RunConfig::MetricSource::none:
      break;
  }
  fail(ErrorKind::ConfigError, "metric: missing");
}

/// Chart potential as exact local jets, or nullopt for sampled input.
std::optional<JetFunction> chart_jet(const RunConfig& c) {
  if (c.metric != RunConfig::MetricSource::builtin) return std::nullopt;
  if (c.builtin_name == "constant") {
    const double value = param(c, "value", 0.0);
    return JetFunction([value](cplx, int n) {
      PowerSeries2 s = PowerSeries2::constant(value, n);
      s.symmetrize();
      return s;
    });
  }
  if (c.builtin_name == "fubini_study") return fubini_study_jet(param(c, "degree", 1.0));
  if (c.builtin_name == "hyperbolic") return hyperbolic_jet();
  // gaussian_bundle: h = exp(-sign |z|^2), pseudoconvex only for sign > 0.
  const double sign = param(c, "sign", 1.0);
  return potential_jet_from_metric([sign](cplx z0, int n) {
    const auto z = PowerSeries2::z_about(z0, n);
    const auto zb = PowerSeries2::zbar_about(z0, n);
    PowerSeries2 e = (z * zb) * -sign;
    e.symmetrize();
    return exp(e);
  });
}

ChartGrid chart_potential_samples(const RunConfig& c) {
  ChartGrid f = load_chart_grid(c.samples_path, "z", true);
  return c.metric_kind == "metric_h" ? potential_from_metric(f) : f;
}

void maybe_dump(const RunConfig& c, const PeriodicField& f) {
  if (!c.grid_dump_path.empty()) dump_grid(f, c.grid_dump_path);
}
void maybe_dump(const RunConfig& c, const ChartGrid& f) {
  if (!c.grid_dump_path.empty()) dump_grid(f, c.grid_dump_path);
}

template <class F>
json form_errors(const F& u) {
  const F q = cartan_r(u, RForm::q_form);
  const F p = cartan_r(u, RForm::p_form);
  const F d = cartan_r(u, RForm::divergence_form);
  return {{"q_vs_p", relative_sup_error(q, p)}, {"divergence_vs_p", relative_sup_error(d, p)}};
}

json run_invariant(const RunConfig& c, json& diag) {
  const RForm form = rform_from_string(c.form);
  json res;
  res["form"] = c.form;
  if (c.surface == RunConfig::Surface::torus) {
    const PeriodicField u = torus_potential(c);
    diag["u_tail_energy_fraction"] = u.tail_energy_fraction();
    const PeriodicField r = checked_cartan_r(u, form, c.form_agreement);
    res["r"] = field_stats(r);
    res["form_errors"] = form_errors(u);
    res["gauss_curvature"] = real_range(gauss_curvature(u).values());
    const double rs = r.sup_norm();
    res["kzz_identity_residual"] = kzz_identity_residual(u) / (rs > 0.0 ? rs : 1.0);
    res["spherical_test"] = spherical_test(u, c.spherical);
    maybe_dump(c, r);
    return res;
  }
  if (c.surface == RunConfig::Surface::sphere) {
    const double R = SphereOptions{}.chart_radius;
    bool spherical = true;
    for (const bool second : {false, true}) {
      const std::string id = second ? "w" : "z";
      const JetFunction jet = sphere_potential_jet(c.sphere, second);
      const ChartGrid r = chart_cartan_r(jet, id, R, c.grid_n, form);
      const ChartGrid k = chart_gauss_curvature(jet, id, R, c.grid_n);
      const ChartGrid kzz = chart_curvature_hessian_zz(jet, id, R, c.grid_n);
      spherical = spherical && kzz.sup_norm() <= c.spherical * (1.0 + k.sup_norm());
      res["charts"][id] = {{"radius", R}, {"r", field_stats(r)}, {"gauss_curvature", real_range(k)}};
      if (!second) maybe_dump(c, r);
    }
    res["spherical_test"] = spherical;
    return res;
  }
  // chart
  const double R = c.chart_radius;
  if (auto jet = chart_jet(c)) {
    const ChartGrid r = chart_cartan_r(*jet, "z", R, c.grid_n, form);
    json errs;
    for (RForm other : {RForm::q_form, RForm::p_form, RForm::divergence_form}) {
      if (other == form) continue;
      const double e = relative_sup_error(r, chart_cartan_r(*jet, "z", R, c.grid_n, other));
      errs[std::string(to_string(other))] = e;
      if (e > c.form_agreement)
        fail(ErrorKind::FormDisagreement, "chart forms of r disagree");
    }
    const ChartGrid k = chart_gauss_curvature(*jet, "z", R, c.grid_n);
    const ChartGrid kzz = chart_curvature_hessian_zz(*jet, "z", R, c.grid_n);
    res["r"] = field_stats(r);
    res["form_errors"] = errs;
    res["gauss_curvature"] = real_range(k);
    res["spherical_test"] = kzz.sup_norm() <= c.spherical * (1.0 + k.sup_norm());
    maybe_dump(c, r);
    return res;
  }
  const ChartGrid u = chart_potential_samples(c);
  const ChartGrid r = checked_cartan_r(u, form, c.form_agreement);
  res["r"] = field_stats(r);
  res["form_errors"] = form_errors(u);
  res["gauss_curvature"] = real_range(gauss_curvature(u));
  res["spherical_test"] = spherical_test(u, c.spherical);
  maybe_dump(c, r);
  return res;
}

json run_umbilics(const RunConfig& c, bool audit_only) {
  RecordOptions ro;
  ro.locate.zero_floor = c.zero_floor;
  json res;
  if (c.surface == RunConfig::Surface::torus) {
    const PeriodicField u = torus_potential(c);
    const TorusUmbilicResult t = torus_umbilics(u, ro, c.spherical);
    res["zero_clusters"] = t.cells.clusters.size();
    res["records"] = records_json(t.records);
    res["audit"] = audit_json(t.audit);
    res["r"] = field_stats(t.r);
    maybe_dump(c, t.r);
  } else if (c.surface == RunConfig::Surface::sphere) {
    SphereOptions so;
    so.grid_n = c.grid_n;
    so.spherical_tolerance = c.spherical;
    so.records = ro;
    const SphereUmbilicResult s = sphere_two_chart_umbilics(c.sphere, so);
    res["records"] = records_json(s.records);
    res["audit"] = audit_json(s.audit);
    res["r_chart_z"] = field_stats(s.r_chart_z);
    res["r_chart_w"] = field_stats(s.r_chart_w);
    maybe_dump(c, s.r_chart_z);
  } else {
    const double R = c.chart_radius;
    std::optional<JetFunction> jet = chart_jet(c);
    ChartGrid r = jet ? chart_cartan_r(*jet, "z", R, c.grid_n) : cartan_r(chart_potential_samples(c), RForm::p_form);
    FieldEval eval;
    if (jet) eval = [&](cplx z) { return jet_cartan_r(*jet, z); };
    else eval = [&](cplx z) { return r.interpolate(z); };
    if (r.sup_norm() == 0.0) fail(ErrorKind::TotallyDegenerate, "r vanishes identically on the chart");
    const ZeroCellReport cells = locate_zero_cells(r, ro.locate, jet ? eval : FieldEval{});
    const double h = r.spacing();
    auto center = [&](const ZeroCell& cell) { return cplx(-R + (cell.j + 0.5) * h, -R + (cell.i + 0.5) * h); };
    auto euclid = [](cplx a, cplx b) { return std::abs(a - b); };
    res["zero_clusters"] = cells.clusters.size();
    res["records"] = records_json(records_from_clusters(cells, eval, "z", center, euclid));
    res["audit"] = nullptr;
    res["r"] = field_stats(r);
    maybe_dump(c, r);
  }
  if (audit_only && res["audit"].is_object()) res["audit"]["records"] = res["records"];
  return res;
}

PowerSeries2 loewner_g_series(const json& g, int order) {
  if (g.is_string()) {
    const std::string name = g.get<std::string>();
    if (name == "z") return PowerSeries2::monomial(1, 0, 1.0, order);
    if (name == "zbar") return PowerSeries2::monomial(0, 1, 1.0, order);
    return PowerSeries2(order);
  }
  PowerSeries2 s(order);
  for (const auto& e : g.at("coefficients")) {
    const int k = e.at("k").get<int>(), l = e.at("l").get<int>();
    if (k + l > order) fail(ErrorKind::ConfigError, "loewner.g: coefficient degree exceeds the order");
    s.add_to(k, l, {e.at("re").get<double>(), e.at("im").get<double>()});
  }
  return s;
}

json run_loewner(const RunConfig& c) {
  const PowerSeries2 g = loewner_g_series(c.loewner_g, c.loewner_order);
  const LoewnerSolution sol = loewner_solve(g, c.loewner_order, c.loewner_norm);
  const double gs = g.max_abs();
  return {{"order", sol.order},
          {"residual", sol.residual_norm},
          {"relative_residual", sol.residual_norm / (1.0 + gs)},
          {"f", series_table(sol.f)},
          {"phi", series_table(sol.phi)}};
}

json run_search(const RunConfig& c, json& diag) {
  SearchConfig sc;
  sc.omega = c.omega;
  sc.budget = c.search_budget;
  sc.trials = c.search_trials;
  sc.evaluations = c.search_evaluations;
  sc.seed = c.seed;
  sc.grid_n = c.search_grid_n;
  sc.coefficient_bound = c.search_bound;
  sc.s_only = c.search_s_only;
  const SearchReport rep = torus_search(sc);
  diag["search_wall_time"] = rep.wall_time;
  json history = json::array();
  for (const auto& e : rep.history)
    history.push_back({{"index", e.index}, {"trial", e.trial}, {"objective", e.objective}});
  if (!c.grid_dump_path.empty()) dump_grid(cartan_r(rep.best_modes.sample(c.grid_n), RForm::p_form), c.grid_dump_path);
  return {{"seed", rep.seed},
          {"grid_n", rep.grid_n},
          {"objective", rep.objective},
          {"objective_check", rep.objective_check},
          {"resolution_consistent", rep.resolution_consistent},
          {"best_trial", rep.best_trial},
          {"best_modes", modes_json(rep.best_modes)},
          {"history", history}};
}

json run_obstruction(const RunConfig& c) {
  const TrigPotential u = potential_from_modes(c);
  const SymmetryDirection y = c.obstruction_lattice_direction
                                  ? invariant_direction(u.lattice(), c.obstruction_lattice_direction->first,
                                                        c.obstruction_lattice_direction->second)
                                  : SymmetryDirection{c.obstruction_vector->first, c.obstruction_vector->second};
  ObstructionOptions oo;
  oo.grid_n = c.grid_n;
  oo.records.locate.zero_floor = c.zero_floor;
  const ObstructionReport o = symmetric_obstruction_check(u, y, oo);
  if (!c.grid_dump_path.empty()) dump_grid(cartan_r(u.sample(c.grid_n), RForm::p_form), c.grid_dump_path);
  return {{"direction", {y.alpha, y.beta}},
          {"symmetry_defect", o.symmetry_defect},
          {"zero_clusters", o.cells.clusters.size()},
          {"zeros_found", o.zeros_found},
          {"records", records_json(o.records)},
          {"max_relative_residual", o.max_relative_residual},
          {"psi", {{"min", o.psi_min}, {"max", o.psi_max}}},
          {"dpsi", {{"min", o.dpsi_min}, {"max", o.dpsi_max}, {"sign_change", o.dpsi_sign_change},
                    {"at_psi_max", o.dpsi_at_psi_max}}},
          {"reduction_residual", o.reduction_residual}};
}

}  // namespace

json run(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  json diag = json::object();
  json results;
  if (c.operation == "invariant") results = run_invariant(c, diag);
  else if (c.operation == "umbilics") results = run_umbilics(c, false);
  else if (c.operation == "ph-audit") results = run_umbilics(c, true);
  else if (c.operation == "loewner") results = run_loewner(c);
  else if (c.operation == "search") results = run_search(c, diag);
  else if (c.operation == "obstruction") results = run_obstruction(c);
  else fail(ErrorKind::ConfigError, "operation: unknown");

  diag["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json report = {{"version", kVersion}, {"config", config_to_json(c)}, {"results", results}, {"diagnostics", diag}};
  if (!c.report_path.empty()) write_file(c.report_path, report.dump(2) + "\n");
  return report;
}

}  // namespace umbilic
