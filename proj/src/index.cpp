#include "umbilic/index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>

#include "umbilic/cartan.hpp"
#include "umbilic/errors.hpp"

namespace umbilic {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrapped_step(cplx from, cplx to) { return std::arg(to * std::conj(from)); }

// Uniform view of a sampled grid for the cell-winding scan.
struct GridView {
  int n = 0;
  bool periodic = false;
  std::function<cplx(int, int)> node;
  // Value at fractional grid coordinates (row fi, column fj).
  std::function<cplx(double, double)> eval;
  std::function<bool(int, int)> cell_valid;
  // +1 when counterclockwise in (column, row) is counterclockwise in z.
  int orientation = 1;
};

struct EdgeResult {
  double increment = 0.0;
  bool degenerate = false;
};

double refine_edge(cplx fa, cplx fb, double ta, double tb, int depth,
                   const std::function<cplx(double)>& along, double floor, bool& degenerate) {
  if (std::abs(fa) <= floor || std::abs(fb) <= floor) {
    degenerate = true;
    return (std::abs(fa) > 0.0 && std::abs(fb) > 0.0) ? wrapped_step(fa, fb) : 0.0;
  }
  const double d = wrapped_step(fa, fb);
  if (std::abs(d) < kPi / 2) return d;
  if (depth == 0) {
    degenerate = true;
    return d;
  }
  const double tm = 0.5 * (ta + tb);
  const cplx fm = along(tm);
  return refine_edge(fa, fm, ta, tm, depth - 1, along, floor, degenerate) +
         refine_edge(fm, fb, tm, tb, depth - 1, along, floor, degenerate);
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(int size) : parent(size) {
    for (int k = 0; k < size; ++k) parent[k] = k;
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

ZeroCellReport scan_cells(const GridView& g, const LocateOptions& options, double cell_size,
                          const std::function<cplx(double, double)>& z_of) {
  const int n = g.n;
  const int cells_per_axis = g.periodic ? n : n - 1;

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx v = g.node(i, j);
      if (std::isfinite(v.real()) && std::isfinite(v.imag())) scale = std::max(scale, std::abs(v));
    }
  const double floor = options.zero_floor * scale;
  if (scale == 0.0) fail(ErrorKind::TotallyDegenerate, "field vanishes identically");
  long below = 0, total = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx v = g.node(i, j);
      if (!std::isfinite(std::abs(v))) continue;
      ++total;
      if (std::abs(v) <= floor) ++below;
    }
  if (static_cast<double>(below) > options.degenerate_fraction * static_cast<double>(total))
    fail(ErrorKind::TotallyDegenerate,
         "more than " + std::to_string(options.degenerate_fraction) + " of the samples are below the zero floor");

  auto wrap = [&](int k) { return g.periodic ? ((k % n) + n) % n : k; };

  // Horizontal edge (i,j)->(i,j+1) and vertical edge (i,j)->(i+1,j), computed once each.
  const int edge_rows = g.periodic ? n : n;
  std::vector<EdgeResult> horiz(static_cast<std::size_t>(edge_rows) * n), vert(static_cast<std::size_t>(n) * n);
  std::vector<char> horiz_done(horiz.size(), 0), vert_done(vert.size(), 0);

  // A node sitting on a zero takes its value from a nearby fixed offset, so
  // the zero falls inside exactly one of the adjacent cells.
  auto node_value = [&](int i, int j) {
    const cplx v = g.node(i, j);
    if (std::abs(v) > floor) return v;
    const double di = (g.periodic || i + 1 < n) ? 7.31e-4 : -7.31e-4;
    const double dj = (g.periodic || j + 1 < n) ? 4.19e-4 : -4.19e-4;
    const cplx shifted = g.eval(i + di, j + dj);
    return std::abs(shifted) > floor ? shifted : v;
  };

  auto edge = [&](bool horizontal, int i, int j) -> const EdgeResult& {
    const std::size_t key = static_cast<std::size_t>(i) * n + j;
    auto& store = horizontal ? horiz : vert;
    auto& done = horizontal ? horiz_done : vert_done;
    if (!done[key]) {
      EdgeResult r;
      const cplx fa = node_value(i, j);
      const cplx fb = horizontal ? node_value(i, wrap(j + 1)) : node_value(wrap(i + 1), j);
      auto along = [&](double t) {
        return horizontal ? g.eval(static_cast<double>(i), j + t) : g.eval(i + t, static_cast<double>(j));
      };
      r.increment = refine_edge(fa, fb, 0.0, 1.0, options.max_edge_depth, along, floor, r.degenerate);
      store[key] = r;
      done[key] = 1;
    }
    return store[key];
  };

  std::vector<ZeroCell> flagged;
  std::vector<int> cell_slot(static_cast<std::size_t>(cells_per_axis) * cells_per_axis, -1);
  for (int i = 0; i < cells_per_axis; ++i)
    for (int j = 0; j < cells_per_axis; ++j) {
      if (g.cell_valid && !g.cell_valid(i, j)) continue;
      const auto& bottom = edge(true, i, j);
      const auto& right = edge(false, i, wrap(j + 1));
      const auto& top = edge(true, wrap(i + 1), j);
      const auto& left = edge(false, i, j);
      const double total_phase = bottom.increment + right.increment - top.increment - left.increment;
      const int winding = g.orientation * static_cast<int>(std::lround(total_phase / kTwoPi));
      const bool degenerate = bottom.degenerate || right.degenerate || top.degenerate || left.degenerate;
      if (winding != 0 || degenerate) {
        cell_slot[static_cast<std::size_t>(i) * cells_per_axis + j] = static_cast<int>(flagged.size());
        flagged.push_back({i, j, winding, degenerate});
      }
    }

  DisjointSets sets(static_cast<int>(flagged.size()));
  auto slot_of = [&](int i, int j) -> int {
    if (g.periodic) {
      i = ((i % cells_per_axis) + cells_per_axis) % cells_per_axis;
      j = ((j % cells_per_axis) + cells_per_axis) % cells_per_axis;
    } else if (i < 0 || j < 0 || i >= cells_per_axis || j >= cells_per_axis) {
      return -1;
    }
    return cell_slot[static_cast<std::size_t>(i) * cells_per_axis + j];
  };
  for (std::size_t k = 0; k < flagged.size(); ++k)
    for (int di = -1; di <= 1; ++di)
      for (int dj = -1; dj <= 1; ++dj) {
        const int other = slot_of(flagged[k].i + di, flagged[k].j + dj);
        if (other >= 0) sets.unite(static_cast<int>(k), other);
      }

  // Group, then unwrap coordinates by a breadth-first walk for the cluster centre.
  std::vector<std::vector<int>> groups;
  std::vector<int> group_of(flagged.size(), -1);
  for (std::size_t k = 0; k < flagged.size(); ++k) {
    const int root = sets.find(static_cast<int>(k));
    if (group_of[root] < 0) {
      group_of[root] = static_cast<int>(groups.size());
      groups.emplace_back();
    }
    groups[group_of[root]].push_back(static_cast<int>(k));
  }

  ZeroCellReport report;
  report.field_scale = scale;
  report.zero_floor = floor;
  report.cell_size = cell_size;
  for (const auto& members : groups) {
    ZeroCluster cluster;
    std::vector<std::pair<int, int>> unwrapped(flagged.size());
    std::vector<char> seen(flagged.size(), 0);
    std::queue<int> queue;
    queue.push(members.front());
    seen[members.front()] = 1;
    unwrapped[members.front()] = {flagged[members.front()].i, flagged[members.front()].j};
    double ci = 0.0, cj = 0.0;
    while (!queue.empty()) {
      const int k = queue.front();
      queue.pop();
      const auto [ui, uj] = unwrapped[k];
      ci += ui + 0.5;
      cj += uj + 0.5;
      cluster.cells.push_back(flagged[k]);
      cluster.winding += flagged[k].winding;
      cluster.degenerate = cluster.degenerate || flagged[k].degenerate;
      for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          const int other = slot_of(ui + di, uj + dj);
          if (other >= 0 && !seen[other]) {
            seen[other] = 1;
            unwrapped[other] = {ui + di, uj + dj};
            queue.push(other);
          }
        }
    }
    const double m = static_cast<double>(cluster.cells.size());
    cluster.center = z_of(ci / m, cj / m);
    report.clusters.push_back(std::move(cluster));
  }
  return report;
}

/// Levenberg-Marquardt on (Re f, Im f) starting at z, confined to a disk.
cplx refine_zero(const FieldEval& f, cplx start, double bound, double step_scale) {
  cplx z = start;
  cplx fz = f(z);
  double lambda = 1e-3;
  const double delta = 1e-4 * step_scale;
  for (int iter = 0; iter < 100 && std::abs(fz) > 0.0; ++iter) {
    const cplx fx = (f(z + delta) - f(z - delta)) / (2.0 * delta);
    const cplx fy = (f(z + cplx(0.0, delta)) - f(z - cplx(0.0, delta))) / (2.0 * delta);
    // J = [[Re fx, Re fy], [Im fx, Im fy]]
    const double a = fx.real(), b = fy.real(), c = fx.imag(), d = fy.imag();
    const double g0 = a * fz.real() + c * fz.imag();
    const double g1 = b * fz.real() + d * fz.imag();
    const double h00 = a * a + c * c, h01 = a * b + c * d, h11 = b * b + d * d;
    bool improved = false;
    for (int attempt = 0; attempt < 20; ++attempt) {
      const double mu = lambda * (h00 + h11);
      const double m00 = h00 + mu, m11 = h11 + mu;
      const double det = m00 * m11 - h01 * h01;
      if (!(std::abs(det) > 0.0)) {
        lambda *= 10.0;
        continue;
      }
      const double dx = -(m11 * g0 - h01 * g1) / det;
      const double dy = -(-h01 * g0 + m00 * g1) / det;
      const cplx candidate = z + cplx(dx, dy);
      if (std::abs(candidate - start) > bound) {
        lambda *= 10.0;
        continue;
      }
      const cplx fc = f(candidate);
      if (std::abs(fc) < std::abs(fz)) {
        const double moved = std::hypot(dx, dy);
        z = candidate;
        fz = fc;
        lambda = std::max(lambda * 0.1, 1e-12);
        improved = true;
        if (moved < 1e-15 * (1.0 + std::abs(z))) return z;
        break;
      }
      lambda *= 10.0;
    }
    if (!improved) break;
  }
  return z;
}

}  // namespace

QuadraticDifferentialRep quadratic_differential_rep(const ChartGrid& r) { return {r * -1.0, r.chart_id()}; }

int winding_degree(std::span<const cplx> loop, double zero_floor) {
  if (loop.empty()) fail(ErrorKind::InvalidArgument, "winding_degree needs a nonempty loop");
  for (const auto& v : loop)
    if (!(std::abs(v) > zero_floor)) fail(ErrorKind::ZeroOnContour, "contour value below the zero floor");
  double total = 0.0;
  for (std::size_t k = 0; k < loop.size(); ++k) {
    const double step = wrapped_step(loop[k], loop[(k + 1) % loop.size()]);
    if (std::abs(step) >= kPi / 2) fail(ErrorKind::PhaseStepTooLarge, "phase step too large; refine the contour");
    total += step;
  }
  return static_cast<int>(std::lround(total / kTwoPi));
}

ZeroCellReport locate_zero_cells(const PeriodicField& field, const LocateOptions& options) {
  const PeriodicInterpolant interp(field);
  const int n = field.n();
  GridView g;
  g.n = n;
  g.periodic = true;
  g.node = [&](int i, int j) { return field.at(i, j); };
  g.eval = [&](double fi, double fj) { return interp.at_st(fj / n, fi / n); };
  g.orientation = field.lattice().omega().imag() > 0 ? 1 : -1;
  const auto& lat = field.lattice();
  const double cell = std::max(1.0, std::abs(lat.omega())) / n;
  return scan_cells(g, options, cell, [&](double fi, double fj) { return lat.z_of(fj / n, fi / n); });
}

ZeroCellReport locate_zero_cells(const ChartGrid& field, const LocateOptions& options, const FieldEval& exact) {
  const int n = field.n();
  const double h = field.spacing();
  const double R = field.radius();
  GridView g;
  g.n = n;
  g.periodic = false;
  g.node = [&](int i, int j) { return field.at(i, j); };
  g.eval = [&](double fi, double fj) {
    const cplx z(-R + fj * h, -R + fi * h);
    return exact ? exact(z) : field.interpolate(z);
  };
  g.cell_valid = [&](int i, int j) {
    return field.in_mask(i, j) && field.in_mask(i + 1, j) && field.in_mask(i, j + 1) && field.in_mask(i + 1, j + 1);
  };
  return scan_cells(g, options, h, [&](double fi, double fj) { return cplx(-R + fj * h, -R + fi * h); });
}

int umbilic_index(const FieldEval& field, cplx z0, double radius, const IndexOptions& options) {
  if (!(radius > 0.0)) fail(ErrorKind::InvalidArgument, "contour radius must be positive");
  std::vector<cplx> values;
  for (int m = options.initial_points; m <= options.max_points; m *= 2) {
    values.resize(m);
    for (int k = 0; k < m; ++k) values[k] = field(z0 + std::polar(radius, kTwoPi * k / m));
    for (const auto& v : values)
      if (!(std::abs(v) > options.zero_floor)) fail(ErrorKind::ZeroOnContour, "field vanishes on the index contour");
    bool fine = true;
    for (int k = 0; k < m && fine; ++k) fine = std::abs(wrapped_step(values[k], values[(k + 1) % m])) < kPi / 2;
    if (fine) return -winding_degree(values, options.zero_floor);
  }
  fail(ErrorKind::PhaseStepTooLarge, "index contour not resolved within the point budget");
}

int umbilic_index(const ChartGrid& field, cplx z0, double radius, const IndexOptions& options) {
  return umbilic_index([&](cplx z) { return field.interpolate(z); }, z0, radius, options);
}

int umbilic_index(const PeriodicField& field, cplx z0, double radius, const IndexOptions& options) {
  const PeriodicInterpolant interp(field);
  return umbilic_index([&](cplx z) { return interp(z); }, z0, radius, options);
}

std::vector<UmbilicRecord> records_from_clusters(const ZeroCellReport& cells, const FieldEval& field,
                                                 const std::string& chart_id,
                                                 const std::function<cplx(const ZeroCell&)>& cell_center,
                                                 const std::function<double(cplx, cplx)>& distance) {
  struct Candidate {
    cplx start;
    int winding;
    bool degenerate;
    double extent;
  };
  const double h = cells.cell_size;
  std::vector<Candidate> candidates;
  for (const auto& cluster : cells.clusters) {
    double extent = 0.0;
    for (const auto& c : cluster.cells) extent = std::max(extent, distance(cell_center(c), cluster.center));
    if (cluster.degenerate) {
      // Non-isolated zeros (or a zero sitting on the grid): cell windings are not trustworthy.
      candidates.push_back({cluster.center, cluster.winding, true, extent});
      continue;
    }
    if (cluster.winding != 0) {
      candidates.push_back({cluster.center, cluster.winding, false, extent});
      continue;
    }
    for (const auto& c : cluster.cells)
      if (c.winding != 0) candidates.push_back({cell_center(c), c.winding, false, 0.0});
  }

  std::vector<UmbilicRecord> records;
  std::vector<cplx> located;
  for (const auto& cand : candidates) {
    const double bound = cand.extent + 2.0 * h;
    // Start from the best of the centre and its cell-sized neighbourhood.
    cplx start = cand.start;
    double best = std::abs(field(start));
    for (int k = 0; k < 8; ++k) {
      const cplx trial = cand.start + std::polar(0.5 * h, kTwoPi * k / 8);
      const double v = std::abs(field(trial));
      if (v < best) {
        best = v;
        start = trial;
      }
    }
    const cplx z = refine_zero(field, start, bound, h);
    located.push_back(z);
    UmbilicRecord rec;
    rec.z0 = z;
    rec.residual = std::abs(field(z));
    rec.chart_id = chart_id;
    rec.cell_winding = cand.winding;
    rec.degenerate = cand.degenerate;
    records.push_back(rec);
  }

  const double floor = cells.zero_floor;
  for (std::size_t k = 0; k < records.size(); ++k) {
    auto& rec = records[k];
    if (rec.degenerate) continue;
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < records.size(); ++l)
      if (l != k) nearest = std::min(nearest, distance(located[k], located[l]));
    double radius = std::max(candidates[k].extent + 0.5 * h, 0.75 * h);
    if (std::isfinite(nearest)) radius = std::min(radius, 0.45 * nearest);
    rec.twice_index = -rec.cell_winding;
    for (int attempt = 0; attempt < 3; ++attempt, radius *= 0.5) {
      rec.contour_radius = radius;
      try {
        const int idx = umbilic_index(field, rec.z0, radius, {64, 1 << 14, floor});
        if (idx == -rec.cell_winding) break;
      } catch (const Error&) {
      }
    }
  }
  return records;
}

AuditReport poincare_hopf_audit(std::span<const UmbilicRecord> records, const SurfaceSpec& surface) {
  AuditReport a;
  a.records.assign(records.begin(), records.end());
  for (const auto& r : records) {
    a.sum_twice_index += r.twice_index;
    if (r.degenerate) ++a.degenerate_records;
  }
  a.expected = 2L * surface.euler;
  a.discrepancy = a.sum_twice_index - a.expected;
  a.pass = a.discrepancy == 0 && a.degenerate_records == 0;
  return a;
}

ChartTransition ChartTransition::identity() {
  return {[](cplx w) { return w; }, [](cplx) { return cplx(1.0); }};
}

ChartTransition ChartTransition::inversion() {
  return {[](cplx w) { return 1.0 / w; }, [](cplx w) { return -1.0 / (w * w); }};
}

namespace {

bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

ChartGrid transition_grid(const std::function<cplx(cplx)>& alpha_at, const ChartTransition& transition,
                          std::string target_chart, double radius, int n) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return ChartGrid::from_function(std::move(target_chart), radius, n, [&](cplx w) -> cplx {
    const cplx z = transition.map(w);
    const cplx dz = transition.derivative(w);
    if (!finite(z) || !finite(dz)) return {nan, nan};
    if (std::abs(dz) == 0.0) fail(ErrorKind::TransitionSingular, "transition derivative vanishes on the target chart");
    const cplx v = alpha_at(z) * dz * dz;
    return finite(v) ? v : cplx(nan, nan);
  });
}

}  // namespace

ChartGrid chart_transition_quadratic(const FieldEval& alpha, const ChartTransition& transition,
                                     std::string target_chart, double radius, int n) {
  return transition_grid(alpha, transition, std::move(target_chart), radius, n);
}

ChartGrid chart_transition_quadratic(const ChartGrid& alpha, const ChartTransition& transition,
                                     std::string target_chart, double radius, int n) {
  const double R = alpha.radius();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return transition_grid(
      [&](cplx z) -> cplx {
        if (std::abs(z.real()) > R || std::abs(z.imag()) > R) return {nan, nan};
        return alpha.interpolate(z);
      },
      transition, std::move(target_chart), radius, n);
}

TorusUmbilicResult torus_umbilics(const PeriodicField& u, const RecordOptions& options, double spherical_tolerance) {
  if (!u.real_tag()) fail(ErrorKind::InvalidArgument, "potential u must be real-tagged");
  if (spherical_test(u, spherical_tolerance))
    fail(ErrorKind::TotallyDegenerate, "potential is locally spherical (constant curvature): r vanishes identically");
  PeriodicField r = cartan_r(u, RForm::p_form);
  ZeroCellReport cells = locate_zero_cells(r, options.locate);

  const auto& lat = u.lattice();
  const int n = u.n();
  const PeriodicInterpolant interp(r);
  auto reduce = [&](cplx z) {
    double s, t;
    lat.st_of(z, s, t);
    s -= std::floor(s);
    t -= std::floor(t);
    return lat.z_of(s, t);
  };
  auto distance = [&](cplx a, cplx b) {
    double s, t;
    lat.st_of(a - b, s, t);
    s -= std::round(s);
    t -= std::round(t);
    double best = std::numeric_limits<double>::infinity();
    for (int ds = -1; ds <= 1; ++ds)
      for (int dt = -1; dt <= 1; ++dt) best = std::min(best, std::abs(lat.z_of(s + ds, t + dt)));
    return best;
  };
  auto center = [&](const ZeroCell& c) { return lat.z_of((c.j + 0.5) / n, (c.i + 0.5) / n); };
  auto records = records_from_clusters(
      cells, [&](cplx z) { return interp(z); }, "torus", center, distance);
  for (auto& rec : records) rec.z0 = reduce(rec.z0);
  AuditReport audit = poincare_hopf_audit(records, SurfaceSpec::torus());
  return {std::move(r), std::move(cells), std::move(records), std::move(audit)};
}

JetFunction sphere_potential_jet(const SphereMetricSpec& spec, bool second_chart) {
  if (!(spec.degree > 0.0)) fail(ErrorKind::InvalidArgument, "sphere degree must be positive");
  double bound = 0.0;
  for (const auto& p : spec.perturbations) {
    if (p.harmonic == "re" || p.harmonic == "im" || p.harmonic == "height")
      bound += 0.5 * std::abs(p.epsilon);
    else if (p.harmonic == "re2")
      bound += 0.25 * std::abs(p.epsilon);
    else
      fail(ErrorKind::InvalidArgument, "unknown spherical harmonic: " + p.harmonic);
  }
  if (bound >= 1.0) fail(ErrorKind::InvalidArgument, "perturbation too large: conformal factor not positive");

  return [spec, second_chart](cplx z0, int degree) {
    const auto z = PowerSeries2::z_about(z0, degree);
    const auto zb = PowerSeries2::zbar_about(z0, degree);
    PowerSeries2 one_plus = z * zb + cplx(1.0);
    one_plus.symmetrize();
    const PowerSeries2 inv = reciprocal(one_plus);
    PowerSeries2 factor = PowerSeries2::constant(1.0, degree);
    for (const auto& p : spec.perturbations) {
      PowerSeries2 term;
      double sign = 1.0;
      if (p.harmonic == "re") {
        term = (z + zb) * 0.5 * inv;
      } else if (p.harmonic == "im") {
        term = (z - zb) * cplx(0.0, -0.5) * inv;
        if (second_chart) sign = -1.0;
      } else if (p.harmonic == "height") {
        term = ((z * zb) * -1.0 + cplx(1.0)) * 0.5 * inv;
        if (second_chart) sign = -1.0;
      } else {
        term = (z * z + zb * zb) * 0.5 * (inv * inv);
      }
      factor += term * (sign * p.epsilon);
    }
    factor.symmetrize();
    PowerSeries2 u = log(one_plus) * -2.0 + log(factor) + cplx(std::log(spec.degree));
    u.symmetrize();
    return u;
  };
}

SphereUmbilicResult sphere_two_chart_umbilics(const SphereMetricSpec& spec, const SphereOptions& options) {
  const JetFunction jet_z = sphere_potential_jet(spec, false);
  const JetFunction jet_w = sphere_potential_jet(spec, true);
  const double R = options.chart_radius;
  if (!(R > 1.0)) fail(ErrorKind::InvalidArgument, "sphere charts must extend past the unit circle");

  // Locally spherical test on a coarse sampling of both charts.
  for (const auto* jet : {&jet_z, &jet_w}) {
    const ChartGrid kzz = chart_curvature_hessian_zz(*jet, "test", R, 33);
    const ChartGrid k = chart_gauss_curvature(*jet, "test", R, 33);
    if (kzz.sup_norm() <= options.spherical_tolerance * (1.0 + k.sup_norm()))
      fail(ErrorKind::TotallyDegenerate, "sphere metric has constant curvature: r vanishes identically");
  }

  ChartGrid r_z = chart_cartan_r(jet_z, "z", R, options.grid_n);
  ChartGrid r_w = chart_cartan_r(jet_w, "w", R, options.grid_n);
  const FieldEval eval_z = [&](cplx z) { return jet_cartan_r(jet_z, z); };
  const FieldEval eval_w = [&](cplx w) { return jet_cartan_r(jet_w, w); };

  auto euclid = [](cplx a, cplx b) { return std::abs(a - b); };
  auto chart_records = [&](const ChartGrid& r, const FieldEval& eval) {
    const ZeroCellReport cells = locate_zero_cells(r, options.records.locate, eval);
    const double h = r.spacing();
    auto center = [&](const ZeroCell& c) { return cplx(-R + (c.j + 0.5) * h, -R + (c.i + 0.5) * h); };
    return records_from_clusters(cells, eval, r.chart_id(), center, euclid);
  };

  // Each zero in the overlap is usually seen by both charts. Pair the
  // sightings, then give the zero to the chart that owns its location.
  const double owner = 1.0 + options.ownership_slack;
  const auto from_z = chart_records(r_z, eval_z);
  const auto from_w = chart_records(r_w, eval_w);
  const double match = 4.0 * r_z.spacing();
  std::vector<char> w_matched(from_w.size(), 0);
  std::vector<UmbilicRecord> records;
  for (const auto& rz : from_z) {
    std::ptrdiff_t partner = -1;
    for (std::size_t k = 0; k < from_w.size(); ++k)
      if (!w_matched[k] && std::abs(from_w[k].z0) > 0.0 && std::abs(1.0 / from_w[k].z0 - rz.z0) <= match) {
        partner = static_cast<std::ptrdiff_t>(k);
        break;
      }
    if (partner >= 0) w_matched[partner] = 1;
    if (std::abs(rz.z0) <= owner || partner < 0) {
      records.push_back(rz);
    } else {
      records.push_back(from_w[partner]);
    }
  }
  for (std::size_t k = 0; k < from_w.size(); ++k)
    if (!w_matched[k] && std::abs(from_w[k].z0) < 1.0 / owner) records.push_back(from_w[k]);

  // Recompute each index in the other chart when the record lies in the overlap.
  for (auto& rec : records) {
    if (rec.degenerate) continue;
    const double m = std::abs(rec.z0);
    if (m < 1.0 / R || m > R) continue;
    const cplx other = 1.0 / rec.z0;
    const double radius = rec.contour_radius / (m * m);
    const FieldEval& eval = rec.chart_id == "z" ? eval_w : eval_z;
    rec.chart_checked = true;
    try {
      rec.chart_stable = umbilic_index(eval, other, radius) == rec.twice_index;
    } catch (const Error&) {
      rec.chart_stable = false;
    }
  }

  AuditReport audit = poincare_hopf_audit(records, SurfaceSpec::sphere());
  return {std::move(records), std::move(audit), std::move(r_z), std::move(r_w)};
}

}  // namespace umbilic
