#include "umbilic/periodic_field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "umbilic/errors.hpp"

namespace umbilic {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place 2D DFT of an n x n row-major array. sign = FFTW_FORWARD or
/// FFTW_BACKWARD; no normalization.
void fft2(std::vector<cplx>& data, int n, int sign) {
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_2d(n, n, ptr, ptr, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
}

void require_compatible(const PeriodicField& a, const PeriodicField& b) {
  if (!(a.lattice() == b.lattice()) || a.n() != b.n())
    fail(ErrorKind::InvalidArgument, "periodic fields differ in lattice or resolution");
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

TorusLattice::TorusLattice(cplx omega) : omega_(omega) {
  if (omega.imag() == 0.0 || !std::isfinite(omega.real()) || !std::isfinite(omega.imag()))
    fail(ErrorKind::InvalidArgument, "torus lattice requires Im(omega) != 0");
}

void TorusLattice::st_of(cplx z, double& s, double& t) const noexcept {
  t = z.imag() / omega_.imag();
  s = z.real() - t * omega_.real();
}

PeriodicField::PeriodicField(TorusLattice lattice, int n, std::vector<cplx> values, bool real_tag)
    : lattice_(lattice), n_(n), values_(std::move(values)), real_tag_(real_tag) {
  if (n < 8 || n % 2 != 0) fail(ErrorKind::InvalidArgument, "periodic grid needs even n >= 8");
  if (values_.size() != static_cast<std::size_t>(n) * n)
    fail(ErrorKind::InvalidArgument, "periodic field sample count does not match n*n");
  if (real_tag_) {
    const double scale = 1.0 + sup_norm();
    if (max_imag() > 1e-12 * scale)
      fail(ErrorKind::InvalidArgument, "real-tagged periodic field has imaginary samples");
  }
}

PeriodicField PeriodicField::constant(TorusLattice lattice, int n, cplx value) {
  return PeriodicField(lattice, n, std::vector<cplx>(static_cast<std::size_t>(n) * n, value),
                       value.imag() == 0.0);
}

PeriodicField PeriodicField::from_function(TorusLattice lattice, int n,
                                           const std::function<cplx(double, double)>& fn,
                                           bool real_tag) {
  std::vector<cplx> v(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx x = fn(static_cast<double>(j) / n, static_cast<double>(i) / n);
      if (real_tag) x.imag(0.0);
      v[static_cast<std::size_t>(i) * n + j] = x;
    }
  return PeriodicField(lattice, n, std::move(v), real_tag);
}

double PeriodicField::sup_norm() const {
  double m = 0.0;
  for (const auto& x : values_) m = std::max(m, std::abs(x));
  return m;
}

double PeriodicField::max_imag() const {
  double m = 0.0;
  for (const auto& x : values_) m = std::max(m, std::abs(x.imag()));
  return m;
}

std::vector<cplx> PeriodicField::spectrum() const {
  std::vector<cplx> spec(values_);
  fft2(spec, n_, FFTW_FORWARD);
  const double norm = 1.0 / (static_cast<double>(n_) * n_);
  for (auto& c : spec) c *= norm;
  const int nyq = n_ / 2;
  for (int m = 0; m < n_; ++m) {
    spec[static_cast<std::size_t>(nyq) * n_ + m] = 0.0;
    spec[static_cast<std::size_t>(m) * n_ + nyq] = 0.0;
  }
  return spec;
}

PeriodicField PeriodicField::from_spectrum(TorusLattice lattice, int n, const std::vector<cplx>& spec,
                                           bool real_tag) {
  std::vector<cplx> v(spec);
  fft2(v, n, FFTW_BACKWARD);
  if (real_tag)
    for (auto& x : v) x.imag(0.0);
  return PeriodicField(lattice, n, std::move(v), real_tag);
}

double PeriodicField::tail_energy_fraction() const {
  const auto spec = spectrum();
  double total = 0.0, tail = 0.0;
  for (int i = 0; i < n_; ++i) {
    const int kt = std::abs(frequency_of(i, n_));
    for (int j = 0; j < n_; ++j) {
      const int js = std::abs(frequency_of(j, n_));
      const double e = std::norm(spec[static_cast<std::size_t>(i) * n_ + j]);
      total += e;
      if (3 * std::max(kt, js) > n_) tail += e;
    }
  }
  return total > 0.0 ? tail / total : 0.0;
}

cplx PeriodicField::evaluate(double s, double t) const { return PeriodicInterpolant(*this).at_st(s, t); }

PeriodicInterpolant::PeriodicInterpolant(const PeriodicField& f) : lattice_(f.lattice()), real_(f.real_tag()) {
  const int n = f.n();
  const auto spec = f.spectrum();
  double cmax = 0.0;
  for (const auto& c : spec) cmax = std::max(cmax, std::abs(c));
  const double cut = SpectralOptions{}.coefficient_filter * cmax;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const cplx c = spec[static_cast<std::size_t>(i) * n + j];
      if (std::abs(c) > cut) modes_.push_back({frequency_of(j, n), frequency_of(i, n), c});
    }
}

cplx PeriodicInterpolant::at_st(double s, double t) const {
  cplx acc{};
  for (const auto& m : modes_) acc += m.c * std::polar(1.0, kTwoPi * (m.js * s + m.kt * t));
  if (real_) acc.imag(0.0);
  return acc;
}

cplx PeriodicInterpolant::operator()(cplx z) const {
  double s, t;
  lattice_.st_of(z, s, t);
  return at_st(s, t);
}

cplx PeriodicField::evaluate_z(cplx z) const {
  double s, t;
  lattice_.st_of(z, s, t);
  return evaluate(s, t);
}

namespace {

PeriodicField apply_multiplier(const PeriodicField& f, const SpectralOptions& options,
                               const std::function<cplx(int js, int kt)>& multiplier,
                               bool keeps_real) {
  const int n = f.n();
  auto spec = f.spectrum();

  double cmax = 0.0, total = 0.0, tail = 0.0;
  for (const auto& c : spec) cmax = std::max(cmax, std::abs(c));
  const double cut = options.coefficient_filter * cmax;
  for (int i = 0; i < n; ++i) {
    const int kt = frequency_of(i, n);
    for (int j = 0; j < n; ++j) {
      const int js = frequency_of(j, n);
      auto& c = spec[static_cast<std::size_t>(i) * n + j];
      if (std::abs(c) < cut) c = 0.0;
      const double e = std::norm(c);
      total += e;
      if (3 * std::max(std::abs(kt), std::abs(js)) > n) tail += e;
    }
  }
  if (tail > options.tail_fraction * total && std::sqrt(tail) > options.tail_noise_floor)
    fail(ErrorKind::UnderResolved, "periodic field under-resolved: spectral tail fraction " +
                                       std::to_string(tail / total));

  for (int i = 0; i < n; ++i) {
    const int kt = frequency_of(i, n);
    for (int j = 0; j < n; ++j) {
      const int js = frequency_of(j, n);
      spec[static_cast<std::size_t>(i) * n + j] *= multiplier(js, kt);
    }
  }
  return PeriodicField::from_spectrum(f.lattice(), n, spec, keeps_real && f.real_tag());
}

}  // namespace

PeriodicField periodic_derivative(const PeriodicField& f, Wirtinger direction,
                                  const SpectralOptions& options) {
  const cplx w = f.lattice().omega();
  const cplx wb = std::conj(w);
  const cplx denom = wb - w;
  const cplx i2pi(0.0, kTwoPi);
  if (direction == Wirtinger::D) {
    return apply_multiplier(
        f, options, [&](int js, int kt) { return (wb * (i2pi * double(js)) - i2pi * double(kt)) / denom; },
        false);
  }
  return apply_multiplier(
      f, options, [&](int js, int kt) { return (i2pi * double(kt) - w * (i2pi * double(js))) / denom; },
      false);
}

PeriodicField directional_derivative(const PeriodicField& f, double alpha, double beta,
                                     const SpectralOptions& options) {
  // d/dx = D + Dbar, d/dy = i(D - Dbar).
  const cplx w = f.lattice().omega();
  const cplx wb = std::conj(w);
  const cplx denom = wb - w;
  const cplx i2pi(0.0, kTwoPi);
  const cplx I(0.0, 1.0);
  return apply_multiplier(
      f, options,
      [&](int js, int kt) {
        const cplx ds = i2pi * double(js), dt = i2pi * double(kt);
        const cplx d = (wb * ds - dt) / denom;
        const cplx db = (dt - w * ds) / denom;
        return alpha * (d + db) + beta * I * (d - db);
      },
      true);
}

PeriodicField dealiased_product(const PeriodicField& a, const PeriodicField& b) {
  require_compatible(a, b);
  const int n = a.n();
  const int m = 2 * n;
  const auto sa = a.spectrum();
  const auto sb = b.spectrum();
  auto pad = [&](const std::vector<cplx>& s) {
    std::vector<cplx> big(static_cast<std::size_t>(m) * m, cplx{});
    for (int i = 0; i < n; ++i) {
      const int kt = frequency_of(i, n);
      const int bi = kt >= 0 ? kt : kt + m;
      for (int j = 0; j < n; ++j) {
        const int js = frequency_of(j, n);
        const int bj = js >= 0 ? js : js + m;
        big[static_cast<std::size_t>(bi) * m + bj] = s[static_cast<std::size_t>(i) * n + j];
      }
    }
    fft2(big, m, FFTW_BACKWARD);
    return big;
  };
  auto va = pad(sa);
  const auto vb = pad(sb);
  for (std::size_t k = 0; k < va.size(); ++k) va[k] *= vb[k];
  fft2(va, m, FFTW_FORWARD);
  const double norm = 1.0 / (static_cast<double>(m) * m);
  std::vector<cplx> spec(static_cast<std::size_t>(n) * n, cplx{});
  for (int i = 0; i < n; ++i) {
    const int kt = frequency_of(i, n);
    if (2 * std::abs(kt) >= n) continue;
    const int bi = kt >= 0 ? kt : kt + m;
    for (int j = 0; j < n; ++j) {
      const int js = frequency_of(j, n);
      if (2 * std::abs(js) >= n) continue;
      const int bj = js >= 0 ? js : js + m;
      spec[static_cast<std::size_t>(i) * n + j] = va[static_cast<std::size_t>(bi) * m + bj] * norm;
    }
  }
  return PeriodicField::from_spectrum(a.lattice(), n, spec, a.real_tag() && b.real_tag());
}

PeriodicField operator+(const PeriodicField& a, const PeriodicField& b) {
  require_compatible(a, b);
  std::vector<cplx> v(a.values().begin(), a.values().end());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] += b.values()[k];
  return PeriodicField(a.lattice(), a.n(), std::move(v), a.real_tag() && b.real_tag());
}

PeriodicField operator-(const PeriodicField& a, const PeriodicField& b) {
  require_compatible(a, b);
  std::vector<cplx> v(a.values().begin(), a.values().end());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] -= b.values()[k];
  return PeriodicField(a.lattice(), a.n(), std::move(v), a.real_tag() && b.real_tag());
}

PeriodicField operator-(const PeriodicField& a) { return a * -1.0; }

PeriodicField operator*(const PeriodicField& a, const PeriodicField& b) { return dealiased_product(a, b); }

PeriodicField operator*(const PeriodicField& a, cplx s) {
  std::vector<cplx> v(a.values().begin(), a.values().end());
  for (auto& x : v) x *= s;
  return PeriodicField(a.lattice(), a.n(), std::move(v), a.real_tag() && s.imag() == 0.0);
}
PeriodicField operator*(cplx s, const PeriodicField& a) { return a * s; }
PeriodicField operator*(const PeriodicField& a, double s) { return a * cplx(s); }
PeriodicField operator*(double s, const PeriodicField& a) { return a * cplx(s); }

PeriodicField operator+(const PeriodicField& a, cplx s) {
  std::vector<cplx> v(a.values().begin(), a.values().end());
  for (auto& x : v) x += s;
  return PeriodicField(a.lattice(), a.n(), std::move(v), a.real_tag() && s.imag() == 0.0);
}

PeriodicField exp(const PeriodicField& f) {
  std::vector<cplx> v(f.values().begin(), f.values().end());
  for (auto& x : v) x = f.real_tag() ? cplx(std::exp(x.real())) : std::exp(x);
  return PeriodicField(f.lattice(), f.n(), std::move(v), f.real_tag());
}

PeriodicField log(const PeriodicField& f) {
  std::vector<cplx> v(f.values().begin(), f.values().end());
  bool real = f.real_tag();
  for (auto& x : v) {
    if (std::abs(x) < 1e-300) fail(ErrorKind::DomainError, "log of a field with a vanishing sample");
    if (f.real_tag() && x.real() > 0.0) {
      x = std::log(x.real());
    } else {
      x = std::log(x);
      real = false;
    }
  }
  return PeriodicField(f.lattice(), f.n(), std::move(v), real);
}

cplx grid_mean(const PeriodicField& f) {
  cplx acc{};
  for (const auto& x : f.values()) acc += x;
  return acc / static_cast<double>(f.values().size());
}

}  // namespace umbilic
