#pragma once

// Doubly periodic potentials on a flat torus: the one-direction obstruction
// (Pu must vanish somewhere when u is invariant along a constant vector
// field), Chern-number normalization, and a seeded derivative-free search
// for potentials with Pu nonvanishing.

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "umbilic/index.hpp"
#include "umbilic/periodic_field.hpp"

namespace umbilic {

/// Real trigonometric polynomial u = sum c_{jk} e^{2 pi i (j s + k t)} with
/// c_{-j,-k} = conj(c_{jk}); only the half-plane k > 0 or (k = 0, j >= 0) is stored.
class TrigPotential {
 public:
  TrigPotential() : TrigPotential(TorusLattice(cplx(0.0, 1.0)), 0) {}
  TrigPotential(TorusLattice lattice, int budget);

  const TorusLattice& lattice() const noexcept { return lattice_; }
  int budget() const noexcept { return budget_; }

  /// Sets c_{jk} (and implicitly c_{-j,-k}); the (0,0) coefficient must be real.
  void set_mode(int j, int k, cplx c);
  cplx mode(int j, int k) const;
  const std::map<std::pair<int, int>, cplx>& stored_modes() const noexcept { return modes_; }

  double value(double s, double t) const;
  PeriodicField sample(int n) const;
  TrigPotential shifted(double constant) const;

  /// Half-plane modes other than (0,0), in a fixed order.
  static std::vector<std::pair<int, int>> free_modes(int budget, bool s_only = false);

 private:
  TorusLattice lattice_;
  int budget_;
  std::map<std::pair<int, int>, cplx> modes_;
};

/// Constant real vector field alpha d/dx + beta d/dy.
struct SymmetryDirection {
  double alpha;
  double beta;
};

/// Direction along which u(z) = f(p s + q t) is constant.
SymmetryDirection invariant_direction(const TorusLattice& lattice, int p, int q);

struct ObstructionOptions {
  int grid_n = 128;
  /// Yu must be below this times (1 + |u|_inf).
  double symmetry_tolerance = 1e-10;
  RecordOptions records;
};

struct ObstructionReport {
  double symmetry_defect = 0.0;
  ZeroCellReport cells;
  std::vector<UmbilicRecord> records;
  /// Largest refined |Pu| relative to |Pu|_inf.
  double max_relative_residual = 0.0;
  // psi = e^{-u} Y'v with v = e^{-u} D Dbar u and Y' = -beta d/dx + alpha d/dy.
  double psi_min = 0.0;
  double psi_max = 0.0;
  double dpsi_min = 0.0;
  double dpsi_max = 0.0;
  /// Y'psi takes both signs, so psi has interior extrema.
  bool dpsi_sign_change = false;
  /// |Y'psi| at the grid maximum of psi, relative to |Y'psi|_inf.
  double dpsi_at_psi_max = 0.0;
  /// |e^{-2u} Pu - b^2 Y'psi|_inf relative to |e^{-2u} Pu|_inf, where D = aY + bY'.
  double reduction_residual = 0.0;
  bool zeros_found = false;
};

/// Throws SymmetryViolated if Yu != 0 and TotallyDegenerate for locally
/// spherical (e.g. constant) u.
ObstructionReport symmetric_obstruction_check(const TrigPotential& u, const SymmetryDirection& y,
                                              const ObstructionOptions& options = {});

struct ObjectiveDetail {
  /// 0 when Pu has a detected zero (or u is locally spherical), else the grid ratio.
  double objective = 0.0;
  /// min|Pu| / max|Pu| over grid samples.
  double grid_ratio = 0.0;
  int zero_clusters = 0;
  bool degenerate = false;
};

ObjectiveDetail objective_detail(const TrigPotential& u, int grid_n);

/// Scalarization of "Pu has no zeros": min|Pu|/max|Pu| on the grid, and 0 when
/// the cell-winding scan finds a zero of Pu or Pu vanishes identically.
double min_modulus_objective(const TrigPotential& u, int grid_n);

struct SearchConfig {
  cplx omega{0.0, 1.0};
  int budget = 3;
  int trials = 4;
  int evaluations = 100;
  std::uint64_t seed = 42;
  int grid_n = 64;
  /// Box bound on each coefficient modulus.
  double coefficient_bound = 1.0;
  /// Modulus scale of the random starting coefficients.
  double start_amplitude = 0.25;
  /// Initial simplex edge length.
  double simplex_step = 0.1;
  /// Restrict the search to modes independent of t.
  bool s_only = false;
};

struct SearchEvaluation {
  int index;
  int trial;
  double objective;
};

struct SearchReport {
  std::uint64_t seed = 0;
  TrigPotential best_modes;
  double objective = 0.0;
  /// Objective of best_modes at twice the grid resolution.
  double objective_check = 0.0;
  bool resolution_consistent = true;
  int best_trial = 0;
  std::vector<SearchEvaluation> history;
  int grid_n = 0;
  double wall_time = 0.0;
};

/// Multi-start Nelder-Mead maximization of the search score
/// (grid ratio minus the number of detected zero clusters).
SearchReport torus_search(const SearchConfig& config);

/// (1/pi) * integral of e^u over the fundamental domain (trapezoid rule on an n-grid).
double chern_quadrature(const TrigPotential& u, int n = 128);

/// u + C with the quadrature equal to c1.
TrigPotential chern_normalize(const TrigPotential& u, int c1, int n = 128);

}  // namespace umbilic
