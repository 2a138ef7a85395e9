#pragma once

#include <complex>
#include <functional>
#include <span>
#include <vector>

#include "umbilic/power_series.hpp"

namespace umbilic {

/// Lattice generated by 1 and omega, Im(omega) != 0. Points of the torus are
/// addressed by lattice coordinates (s, t) in [0,1)^2 with z = s + t*omega.
class TorusLattice {
 public:
  explicit TorusLattice(cplx omega);

  cplx omega() const noexcept { return omega_; }
  cplx z_of(double s, double t) const noexcept { return s + t * omega_; }
  /// Inverse of z_of (not reduced modulo the lattice).
  void st_of(cplx z, double& s, double& t) const noexcept;
  double area() const noexcept { return std::abs(omega_.imag()); }

  bool operator==(const TorusLattice& other) const noexcept { return omega_ == other.omega_; }

 private:
  cplx omega_;
};

struct SpectralOptions {
  /// Fraction of total spectral energy tolerated in the top third of the
  /// frequency band before a field counts as under-resolved.
  double tail_fraction = 1e-6;
  /// Fields whose tail rms is below this are treated as rounding noise.
  double tail_noise_floor = 1e-11;
  /// Fourier coefficients below this multiple of the largest coefficient are
  /// discarded before differentiation.
  double coefficient_filter = 8.0 * 2.220446049250313e-16;
};

/// Doubly periodic field sampled on an n x n grid of lattice coordinates.
/// Sample (i, j) sits at s = j/n, t = i/n (row index i runs along t).
class PeriodicField {
 public:
  PeriodicField(TorusLattice lattice, int n, std::vector<cplx> values, bool real_tag);

  static PeriodicField constant(TorusLattice lattice, int n, cplx value);
  static PeriodicField from_function(TorusLattice lattice, int n,
                                     const std::function<cplx(double s, double t)>& fn,
                                     bool real_tag);

  const TorusLattice& lattice() const noexcept { return lattice_; }
  int n() const noexcept { return n_; }
  bool real_tag() const noexcept { return real_tag_; }
  void set_real_tag(bool tag) noexcept { real_tag_ = tag; }

  cplx at(int i, int j) const { return values_[static_cast<std::size_t>(i) * n_ + j]; }
  cplx& at(int i, int j) { return values_[static_cast<std::size_t>(i) * n_ + j]; }
  std::span<const cplx> values() const noexcept { return values_; }
  std::span<cplx> values() noexcept { return values_; }

  double s_of(int j) const noexcept { return static_cast<double>(j) / n_; }
  double t_of(int i) const noexcept { return static_cast<double>(i) / n_; }
  cplx z_at(int i, int j) const noexcept { return lattice_.z_of(s_of(j), t_of(i)); }

  double sup_norm() const;
  /// Largest imaginary part; zero for exactly real samples.
  double max_imag() const;

  /// Value of the trigonometric interpolant at arbitrary lattice coordinates.
  cplx evaluate(double s, double t) const;
  cplx evaluate_z(cplx z) const;

  /// Normalized Fourier coefficients, Nyquist row/column zeroed.
  std::vector<cplx> spectrum() const;
  static PeriodicField from_spectrum(TorusLattice lattice, int n, const std::vector<cplx>& spec,
                                     bool real_tag);

  /// Energy fraction carried by frequencies with max(|j|,|k|) > n/3.
  double tail_energy_fraction() const;

 private:
  TorusLattice lattice_;
  int n_;
  std::vector<cplx> values_;
  bool real_tag_;
};

/// Cached spectrum of a periodic field for repeated off-grid evaluation.
class PeriodicInterpolant {
 public:
  explicit PeriodicInterpolant(const PeriodicField& f);

  cplx at_st(double s, double t) const;
  cplx operator()(cplx z) const;

 private:
  struct Mode {
    int js;
    int kt;
    cplx c;
  };
  TorusLattice lattice_;
  bool real_;
  // Coefficients above rounding level only.
  std::vector<Mode> modes_;
};

/// Signed frequency of FFT bin b on an n-point grid.
inline int frequency_of(int b, int n) noexcept { return b <= n / 2 ? b : b - n; }

/// Exact Wirtinger derivative of the trigonometric interpolant.
/// Throws UnderResolved when the spectral tail check fails.
PeriodicField periodic_derivative(const PeriodicField& f, Wirtinger direction,
                                  const SpectralOptions& options = {});

inline PeriodicField wirtinger_d(const PeriodicField& f) { return periodic_derivative(f, Wirtinger::D); }
inline PeriodicField wirtinger_dbar(const PeriodicField& f) {
  return periodic_derivative(f, Wirtinger::Dbar);
}

/// Directional derivative along the constant real vector field
/// alpha d/dx + beta d/dy.
PeriodicField directional_derivative(const PeriodicField& f, double alpha, double beta,
                                     const SpectralOptions& options = {});

/// Product formed on a 2n grid and truncated back to n (dealiased).
PeriodicField dealiased_product(const PeriodicField& a, const PeriodicField& b);

PeriodicField operator+(const PeriodicField& a, const PeriodicField& b);
PeriodicField operator-(const PeriodicField& a, const PeriodicField& b);
PeriodicField operator-(const PeriodicField& a);
PeriodicField operator*(const PeriodicField& a, const PeriodicField& b);
PeriodicField operator*(const PeriodicField& a, cplx s);
PeriodicField operator*(cplx s, const PeriodicField& a);
PeriodicField operator*(const PeriodicField& a, double s);
PeriodicField operator*(double s, const PeriodicField& a);
PeriodicField operator+(const PeriodicField& a, cplx s);

PeriodicField exp(const PeriodicField& f);
PeriodicField log(const PeriodicField& f);

/// Real-mean quadrature over the fundamental domain: (1/n^2) sum of samples.
cplx grid_mean(const PeriodicField& f);

}  // namespace umbilic
