#include "umbilic/torussearch.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "umbilic/cartan.hpp"
#include "umbilic/errors.hpp"

namespace umbilic {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool in_half_plane(int j, int k) { return k > 0 || (k == 0 && j >= 0); }

}  // namespace

TrigPotential::TrigPotential(TorusLattice lattice, int budget) : lattice_(lattice), budget_(budget) {
  if (budget < 0) fail(ErrorKind::InvalidArgument, "mode budget must be nonnegative");
}

void TrigPotential::set_mode(int j, int k, cplx c) {
  if (std::abs(j) > budget_ || std::abs(k) > budget_)
    fail(ErrorKind::InvalidArgument, "mode outside the budget");
  if (j == 0 && k == 0) {
    if (c.imag() != 0.0) fail(ErrorKind::InvalidArgument, "the (0,0) coefficient must be real");
    modes_[{0, 0}] = c;
    return;
  }
  if (in_half_plane(j, k))
    modes_[{j, k}] = c;
  else
    modes_[{-j, -k}] = std::conj(c);
}

cplx TrigPotential::mode(int j, int k) const {
  if (in_half_plane(j, k)) {
    auto it = modes_.find({j, k});
    return it == modes_.end() ? cplx{} : it->second;
  }
  auto it = modes_.find({-j, -k});
  return it == modes_.end() ? cplx{} : std::conj(it->second);
}

double TrigPotential::value(double s, double t) const {
  double v = 0.0;
  for (const auto& [jk, c] : modes_) {
    const auto [j, k] = jk;
    const cplx e = std::polar(1.0, kTwoPi * (j * s + k * t));
    v += (j == 0 && k == 0) ? c.real() : 2.0 * (c * e).real();
  }
  return v;
}

PeriodicField TrigPotential::sample(int n) const {
  if (2 * budget_ >= n) fail(ErrorKind::UnderResolved, "grid too coarse for the mode budget");
  std::vector<cplx> spec(static_cast<std::size_t>(n) * n);
  auto put = [&](int j, int k, cplx c) {
    const int bj = (j % n + n) % n, bk = (k % n + n) % n;
    spec[static_cast<std::size_t>(bk) * n + bj] += c;
  };
  for (const auto& [jk, c] : modes_) {
    const auto [j, k] = jk;
    if (j == 0 && k == 0) {
      put(0, 0, c.real());
    } else {
      put(j, k, c);
      put(-j, -k, std::conj(c));
    }
  }
  return PeriodicField::from_spectrum(lattice_, n, spec, true);
}

TrigPotential TrigPotential::shifted(double constant) const {
  TrigPotential out = *this;
  out.modes_[{0, 0}] = mode(0, 0).real() + constant;
  return out;
}

std::vector<std::pair<int, int>> TrigPotential::free_modes(int budget, bool s_only) {
  std::vector<std::pair<int, int>> out;
  for (int k = 0; k <= (s_only ? 0 : budget); ++k)
    for (int j = -budget; j <= budget; ++j)
      if (in_half_plane(j, k) && !(j == 0 && k == 0)) out.push_back({j, k});
  return out;
}

SymmetryDirection invariant_direction(const TorusLattice& lattice, int p, int q) {
  if (p == 0 && q == 0) fail(ErrorKind::InvalidArgument, "direction (p, q) must be nonzero");
  // u(s,t) = f(p s + q t) is constant along z-direction q - p*omega.
  const cplx d = static_cast<double>(q) - static_cast<double>(p) * lattice.omega();
  const double m = std::abs(d);
  return {d.real() / m, d.imag() / m};
}

ObstructionReport symmetric_obstruction_check(const TrigPotential& pot, const SymmetryDirection& y,
                                              const ObstructionOptions& options) {
  if (y.alpha == 0.0 && y.beta == 0.0) fail(ErrorKind::InvalidArgument, "symmetry direction must be nonzero");
  const PeriodicField u = pot.sample(options.grid_n);
  ObstructionReport rep;
  rep.symmetry_defect = directional_derivative(u, y.alpha, y.beta).sup_norm();
  if (rep.symmetry_defect > options.symmetry_tolerance * (1.0 + u.sup_norm()))
    fail(ErrorKind::SymmetryViolated, "potential is not invariant along the given direction (|Yu| = " +
                                          std::to_string(rep.symmetry_defect) + ")");
  if (spherical_test(u, 1e-9))
    fail(ErrorKind::TotallyDegenerate, "potential is locally spherical: Pu vanishes identically");

  const PeriodicField r = cartan_r(u, RForm::p_form);
  rep.cells = locate_zero_cells(r, options.records.locate);
  const auto& lat = u.lattice();
  const int n = u.n();
  const PeriodicInterpolant interp(r);
  auto distance = [&](cplx a, cplx b) {
    double s, t;
    lat.st_of(a - b, s, t);
    s -= std::round(s);
    t -= std::round(t);
    double best = std::abs(lat.z_of(s, t));
    for (int ds = -1; ds <= 1; ++ds)
      for (int dt = -1; dt <= 1; ++dt) best = std::min(best, std::abs(lat.z_of(s + ds, t + dt)));
    return best;
  };
  auto center = [&](const ZeroCell& c) { return lat.z_of((c.j + 0.5) / n, (c.i + 0.5) / n); };
  rep.records = records_from_clusters(rep.cells, [&](cplx z) { return interp(z); }, "torus", center, distance);
  const double scale = rep.cells.field_scale;
  for (const auto& rec : rep.records) rep.max_relative_residual = std::max(rep.max_relative_residual, rec.residual / scale);
  rep.zeros_found = !rep.records.empty();

  // Reduction used in the obstruction argument.
  const double ap = -y.beta, bp = y.alpha;
  const PeriodicField emu = exp(u * -1.0);
  const PeriodicField v = as_real(emu * wirtinger_d(wirtinger_dbar(u)));
  const PeriodicField psi = as_real(emu * directional_derivative(v, ap, bp));
  const PeriodicField dpsi = directional_derivative(psi, ap, bp);
  rep.psi_min = rep.psi_max = psi.at(0, 0).real();
  rep.dpsi_min = rep.dpsi_max = dpsi.at(0, 0).real();
  int imax = 0, jmax = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double p = psi.at(i, j).real(), d = dpsi.at(i, j).real();
      if (p > rep.psi_max) {
        rep.psi_max = p;
        imax = i;
        jmax = j;
      }
      rep.psi_min = std::min(rep.psi_min, p);
      rep.dpsi_min = std::min(rep.dpsi_min, d);
      rep.dpsi_max = std::max(rep.dpsi_max, d);
    }
  rep.dpsi_sign_change = rep.dpsi_min < 0.0 && rep.dpsi_max > 0.0;
  const double dpsi_sup = dpsi.sup_norm();
  rep.dpsi_at_psi_max = dpsi_sup > 0.0 ? std::abs(dpsi.at(imax, jmax)) / dpsi_sup : 0.0;

  // D = (d/dx - i d/dy)/2 expressed in the frame (Y, Y'): coefficient b of Y'.
  const double nn = y.alpha * y.alpha + y.beta * y.beta;
  const cplx b = cplx(-y.beta, -y.alpha) / (2.0 * nn);
  const PeriodicField lhs = exp(u * -2.0) * r;
  const PeriodicField rhs = dpsi * (b * b);
  const double lhs_sup = lhs.sup_norm();
  rep.reduction_residual = lhs_sup > 0.0 ? (lhs - rhs).sup_norm() / lhs_sup : 0.0;
  return rep;
}

ObjectiveDetail objective_detail(const TrigPotential& pot, int grid_n) {
  if (grid_n < 64) fail(ErrorKind::InvalidArgument, "objective grid must have n >= 64");
  ObjectiveDetail d;
  const PeriodicField u = pot.sample(grid_n);
  if (spherical_test(u, 1e-9)) {
    d.degenerate = true;
    return d;
  }
  const PeriodicField r = cartan_r(u, RForm::p_form);
  double lo = std::abs(r.at(0, 0)), hi = lo;
  for (const auto& x : r.values()) {
    lo = std::min(lo, std::abs(x));
    hi = std::max(hi, std::abs(x));
  }
  if (hi == 0.0) {
    d.degenerate = true;
    return d;
  }
  d.grid_ratio = lo / hi;
  try {
    d.zero_clusters = static_cast<int>(locate_zero_cells(r).clusters.size());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::TotallyDegenerate) throw;
    d.degenerate = true;
    return d;
  }
  d.objective = d.zero_clusters > 0 ? 0.0 : d.grid_ratio;
  return d;
}

double min_modulus_objective(const TrigPotential& u, int grid_n) { return objective_detail(u, grid_n).objective; }

namespace {

struct Candidate {
  std::vector<double> x;
  double score;
  double objective;
};

TrigPotential potential_from(const SearchConfig& cfg, const std::vector<std::pair<int, int>>& modes,
                             const std::vector<double>& x) {
  TrigPotential u(TorusLattice(cfg.omega), cfg.budget);
  for (std::size_t m = 0; m < modes.size(); ++m) u.set_mode(modes[m].first, modes[m].second, {x[2 * m], x[2 * m + 1]});
  return u;
}

void project(std::vector<double>& x, double bound) {
  for (std::size_t m = 0; m + 1 < x.size(); m += 2) {
    const double r = std::hypot(x[m], x[m + 1]);
    if (r > bound) {
      x[m] *= bound / r;
      x[m + 1] *= bound / r;
    }
  }
}

}  // namespace

SearchReport torus_search(const SearchConfig& cfg) {
  if (cfg.budget < 1 || cfg.trials < 1 || cfg.evaluations < 1)
    fail(ErrorKind::InvalidArgument, "search needs budget, trials and evaluations >= 1");
  if (cfg.grid_n < 64 || cfg.grid_n % 2 != 0) fail(ErrorKind::InvalidArgument, "search grid_n must be even and >= 64");
  const auto start_clock = std::chrono::steady_clock::now();
  const auto modes = TrigPotential::free_modes(cfg.budget, cfg.s_only);
  const std::size_t dim = 2 * modes.size();

  SearchReport report;
  report.seed = cfg.seed;
  report.grid_n = cfg.grid_n;
  int evaluation_index = 0;
  bool have_best = false;
  Candidate global_best;

  for (int trial = 0; trial < cfg.trials; ++trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(cfg.seed & 0xffffffffu), static_cast<std::uint32_t>(cfg.seed >> 32),
                      static_cast<std::uint32_t>(trial)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    int used = 0;
    auto evaluate = [&](std::vector<double> x) -> Candidate {
      project(x, cfg.coefficient_bound);
      Candidate c{std::move(x), -1e300, 0.0};
      try {
        const auto d = objective_detail(potential_from(cfg, modes, c.x), cfg.grid_n);
        c.objective = d.objective;
        c.score = d.degenerate ? -1e6 : d.grid_ratio - d.zero_clusters;
      } catch (const Error&) {
        // An unresolvable candidate simply scores worst.
      }
      ++used;
      report.history.push_back({evaluation_index++, trial, c.objective});
      return c;
    };

    std::vector<double> x0(dim);
    for (auto& v : x0) v = cfg.start_amplitude * unit(rng);
    std::vector<Candidate> simplex;
    simplex.push_back(evaluate(x0));
    for (std::size_t k = 0; k < dim && used < cfg.evaluations; ++k) {
      auto x = x0;
      x[k] += cfg.simplex_step * (unit(rng) < 0.0 ? -1.0 : 1.0);
      simplex.push_back(evaluate(x));
    }
    auto by_score = [](const Candidate& a, const Candidate& b) { return a.score > b.score; };

    while (used < cfg.evaluations && simplex.size() == dim + 1) {
      std::stable_sort(simplex.begin(), simplex.end(), by_score);
      std::vector<double> centroid(dim, 0.0);
      for (std::size_t k = 0; k < dim; ++k)
        for (std::size_t v = 0; v < dim; ++v) centroid[v] += simplex[k].x[v] / static_cast<double>(dim);
      const auto& worst = simplex.back();
      auto along = [&](double t) {
        std::vector<double> x(dim);
        for (std::size_t v = 0; v < dim; ++v) x[v] = centroid[v] + t * (worst.x[v] - centroid[v]);
        return x;
      };
      Candidate reflected = evaluate(along(-1.0));
      if (reflected.score > simplex.front().score && used < cfg.evaluations) {
        Candidate expanded = evaluate(along(-2.0));
        simplex.back() = expanded.score > reflected.score ? expanded : reflected;
      } else if (reflected.score > simplex[dim - 1].score) {
        simplex.back() = reflected;
      } else if (used < cfg.evaluations) {
        const bool outside = reflected.score > worst.score;
        Candidate contracted = evaluate(along(outside ? -0.5 : 0.5));
        if (contracted.score > std::max(reflected.score, worst.score)) {
          simplex.back() = contracted;
        } else {
          if (outside) simplex.back() = reflected;
          for (std::size_t k = 1; k < simplex.size() && used < cfg.evaluations; ++k) {
            std::vector<double> x(dim);
            for (std::size_t v = 0; v < dim; ++v) x[v] = simplex[0].x[v] + 0.5 * (simplex[k].x[v] - simplex[0].x[v]);
            simplex[k] = evaluate(x);
          }
        }
      }
    }
    std::stable_sort(simplex.begin(), simplex.end(), by_score);
    const Candidate& best = simplex.front();
    // Lexicographic tie-break on (objective, trial index): earlier trials win ties.
    if (!have_best || best.objective > global_best.objective ||
        (best.objective == global_best.objective && best.score > global_best.score)) {
      global_best = best;
      report.best_trial = trial;
      have_best = true;
    }
  }

  report.best_modes = potential_from(cfg, modes, global_best.x);
  report.objective = global_best.objective;
  try {
    report.objective_check = min_modulus_objective(report.best_modes, 2 * cfg.grid_n);
  } catch (const Error&) {
    report.objective_check = -1.0;
  }
  const double a = report.objective, b = report.objective_check;
  report.resolution_consistent = (a == 0.0 && b == 0.0) || std::abs(a - b) <= 0.1 * std::max(std::abs(a), std::abs(b));
  report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_clock).count();
  return report;
}

double chern_quadrature(const TrigPotential& u, int n) {
  const PeriodicField e = exp(u.sample(n));
  return u.lattice().area() * grid_mean(e).real() / std::numbers::pi;
}

TrigPotential chern_normalize(const TrigPotential& u, int c1, int n) {
  if (c1 < 1) fail(ErrorKind::InvalidArgument, "Chern number must be a positive integer");
  const double q = chern_quadrature(u, n);
  return u.shifted(std::log(static_cast<double>(c1) / q));
}

}  // namespace umbilic
