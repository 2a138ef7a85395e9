#pragma once

// Formal solutions (f, phi) of the curved Hessian prescription
// D^2 f - 2 (D phi)(D f) = g with f = z + zbar + O(|z|^2), phi = O(|z|^2).

#include <Eigen/Dense>
#include <vector>

#include "umbilic/power_series.hpp"

namespace umbilic {

/// Free real parameters of the solution: diagonal coefficients and whether
/// phi's harmonic terms z^k, zbar^k are suppressed. Missing diagonal entries
/// count as zero.
struct LoewnerNormalization {
  /// alpha_n: coefficient of |z|^{2n} in f, n = 1, 2, ...
  std::vector<double> f_diag;
  /// beta_n: coefficient of |z|^{2n} in phi, n = 1, 2, ...
  std::vector<double> phi_diag;
  bool suppress_phi_harmonic = true;
};

struct LoewnerSolution {
  PowerSeries2 f;
  PowerSeries2 phi;
  int order = 0;
  double residual_norm = 0.0;
  LoewnerNormalization normalization;
};

/// One real coordinate of a real homogeneous polynomial of degree M:
/// part 0/1 is the real/imaginary part of the z^k zbar^{M-k} coefficient
/// (k > M/2, paired with its conjugate term), part 2 the real |z|^M coefficient.
struct RealHomogeneousCoordinate {
  int k;
  int part;
};

/// Coordinates of H^R_M in the fixed order: ascending k, real before imaginary.
std::vector<RealHomogeneousCoordinate> real_homogeneous_basis(int degree);

/// Basis polynomial of H^R_M for one coordinate, as a series of max degree M.
PowerSeries2 real_basis_polynomial(int degree, const RealHomogeneousCoordinate& coordinate);

/// Matrix of T_m(f, phi) = D^2 f - 2 D phi from H^R_{m+2} x H^R_{m+1} (columns:
/// f coordinates, then phi coordinates) to H_m (rows: real and imaginary part
/// of the z^p zbar^{m-p} coefficient, p = 0..m). Shape (2m+2) x (2m+5).
Eigen::MatrixXd tm_matrix(int m);

struct RankReport {
  int rank;
  int nullity;
};

/// SVD rank with relative singular-value cutoff.
RankReport tm_rank_report(int m, double relative_cutoff = 1e-10);

/// Degree-by-degree solve through degree N of f (N-1 of phi). Throws
/// SolveFailed when a per-degree residual exceeds 1e-9 relative.
LoewnerSolution loewner_solve(const PowerSeries2& g, int order, const LoewnerNormalization& norm = {});

/// Max modulus of the coefficients of D^2 f - 2 (D phi)(D f) - g of degree <= N-2.
double curved_hessian_residual(const PowerSeries2& f, const PowerSeries2& phi, const PowerSeries2& g, int order);

}  // namespace umbilic
