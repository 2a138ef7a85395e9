#include "umbilic/power_series.hpp"

#include <algorithm>
#include <cmath>

#include "umbilic/errors.hpp"

namespace umbilic {

PowerSeries2::PowerSeries2(int max_degree, bool real_tag)
    : max_degree_(max_degree), real_tag_(real_tag) {
  if (max_degree < 0) fail(ErrorKind::InvalidArgument, "PowerSeries2: negative truncation degree");
  coeffs_.assign(static_cast<std::size_t>(max_degree + 1) * (max_degree + 2) / 2, cplx{});
}

PowerSeries2 PowerSeries2::constant(cplx value, int max_degree) {
  PowerSeries2 s(max_degree, value.imag() == 0.0);
  s.coeffs_[0] = value;
  return s;
}

PowerSeries2 PowerSeries2::z_about(cplx z0, int max_degree) {
  PowerSeries2 s(max_degree);
  s.coeffs_[0] = z0;
  if (max_degree >= 1) s.set(1, 0, 1.0);
  return s;
}

PowerSeries2 PowerSeries2::zbar_about(cplx z0, int max_degree) {
  PowerSeries2 s(max_degree);
  s.coeffs_[0] = std::conj(z0);
  if (max_degree >= 1) s.set(0, 1, 1.0);
  return s;
}

PowerSeries2 PowerSeries2::monomial(int k, int l, cplx coeff, int max_degree) {
  PowerSeries2 s(max_degree);
  s.set(k, l, coeff);
  return s;
}

cplx PowerSeries2::coeff(int k, int l) const {
  if (k < 0 || l < 0 || k + l > max_degree_) return {};
  return coeffs_[index(k, l)];
}

void PowerSeries2::set(int k, int l, cplx value) {
  if (k < 0 || l < 0 || k + l > max_degree_)
    fail(ErrorKind::InvalidArgument, "PowerSeries2: index outside truncation triangle");
  coeffs_[index(k, l)] = value;
}

void PowerSeries2::add_to(int k, int l, cplx value) {
  if (k < 0 || l < 0 || k + l > max_degree_)
    fail(ErrorKind::InvalidArgument, "PowerSeries2: index outside truncation triangle");
  coeffs_[index(k, l)] += value;
}

double PowerSeries2::max_abs(int max_total) const {
  double m = 0.0;
  for (int d = 0; d <= std::min(max_total, max_degree_); ++d)
    for (int l = 0; l <= d; ++l) m = std::max(m, std::abs(coeffs_[index(d - l, l)]));
  return m;
}

double PowerSeries2::hermitian_defect() const {
  double m = 0.0;
  for (int d = 0; d <= max_degree_; ++d)
    for (int l = 0; l <= d; ++l)
      m = std::max(m, std::abs(coeffs_[index(l, d - l)] - std::conj(coeffs_[index(d - l, l)])));
  return m;
}

void PowerSeries2::symmetrize() {
  for (int d = 0; d <= max_degree_; ++d) {
    for (int l = 0; 2 * l <= d; ++l) {
      const int k = d - l;
      const cplx avg = 0.5 * (coeffs_[index(k, l)] + std::conj(coeffs_[index(l, k)]));
      coeffs_[index(k, l)] = avg;
      coeffs_[index(l, k)] = std::conj(avg);
    }
  }
  real_tag_ = true;
}

PowerSeries2 PowerSeries2::truncated(int new_degree) const {
  PowerSeries2 out(std::min(new_degree, max_degree_), real_tag_);
  std::copy_n(coeffs_.begin(), out.coeffs_.size(), out.coeffs_.begin());
  return out;
}

PowerSeries2 PowerSeries2::homogeneous_part(int d) const {
  PowerSeries2 out(max_degree_, real_tag_);
  if (d < 0 || d > max_degree_) return out;
  for (int l = 0; l <= d; ++l) out.coeffs_[index(d - l, l)] = coeffs_[index(d - l, l)];
  return out;
}

PowerSeries2& PowerSeries2::operator+=(const PowerSeries2& other) {
  if (other.max_degree_ < max_degree_) *this = truncated(other.max_degree_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  real_tag_ = real_tag_ && other.real_tag_;
  return *this;
}

PowerSeries2& PowerSeries2::operator-=(const PowerSeries2& other) {
  if (other.max_degree_ < max_degree_) *this = truncated(other.max_degree_);
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  real_tag_ = real_tag_ && other.real_tag_;
  return *this;
}

PowerSeries2& PowerSeries2::operator*=(cplx s) {
  for (auto& c : coeffs_) c *= s;
  if (s.imag() != 0.0) real_tag_ = false;
  return *this;
}

PowerSeries2 operator+(PowerSeries2 a, const PowerSeries2& b) { return a += b; }
PowerSeries2 operator-(PowerSeries2 a, const PowerSeries2& b) { return a -= b; }
PowerSeries2 operator-(PowerSeries2 a) { return a *= -1.0; }
PowerSeries2 operator*(PowerSeries2 a, cplx s) { return a *= s; }
PowerSeries2 operator*(cplx s, PowerSeries2 a) { return a *= s; }
PowerSeries2 operator*(PowerSeries2 a, double s) { return a *= cplx(s); }
PowerSeries2 operator*(double s, PowerSeries2 a) { return a *= cplx(s); }

PowerSeries2 operator+(PowerSeries2 a, cplx s) {
  a.add_to(0, 0, s);
  if (s.imag() != 0.0) a.set_real_tag(false);
  return a;
}
PowerSeries2 operator+(cplx s, PowerSeries2 a) { return std::move(a) + s; }

PowerSeries2 operator*(const PowerSeries2& a, const PowerSeries2& b) {
  const int n = std::min(a.max_degree(), b.max_degree());
  PowerSeries2 out(n);
  for (int da = 0; da <= n; ++da) {
    for (int la = 0; la <= da; ++la) {
      const cplx ca = a.coeff(da - la, la);
      if (ca == cplx{}) continue;
      for (int db = 0; da + db <= n; ++db) {
        for (int lb = 0; lb <= db; ++lb) {
          const cplx cb = b.coeff(db - lb, lb);
          if (cb == cplx{}) continue;
          out.add_to(da - la + db - lb, la + lb, ca * cb);
        }
      }
    }
  }
  if (a.real_tag() && b.real_tag()) out.symmetrize();
  return out;
}

PowerSeries2 series_derivative(const PowerSeries2& f, Wirtinger direction) {
  const int n = f.max_degree();
  if (n == 0) return PowerSeries2(0);
  PowerSeries2 out(n - 1);
  for (int d = 0; d <= n - 1; ++d) {
    for (int l = 0; l <= d; ++l) {
      const int k = d - l;
      if (direction == Wirtinger::D)
        out.set(k, l, static_cast<double>(k + 1) * f.coeff(k + 1, l));
      else
        out.set(k, l, static_cast<double>(l + 1) * f.coeff(k, l + 1));
    }
  }
  return out;
}

cplx series_eval(const PowerSeries2& f, cplx z) {
  const cplx zb = std::conj(z);
  const int n = f.max_degree();
  // Horner in zbar over rows of fixed l, each row Horner in z.
  cplx acc{};
  for (int l = n; l >= 0; --l) {
    cplx row{};
    for (int k = n - l; k >= 0; --k) row = row * z + f.coeff(k, l);
    acc = acc * zb + row;
  }
  return acc;
}

namespace {

/// Sum_j weights[j] * t^j with t lacking a constant term; t^j vanishes
/// beyond the truncation degree, so the sum is exact.
PowerSeries2 compose_nilpotent(const PowerSeries2& t, const std::vector<cplx>& weights) {
  const int n = t.max_degree();
  PowerSeries2 out = PowerSeries2::constant(weights[0], n);
  PowerSeries2 power = PowerSeries2::constant(1.0, n);
  for (int j = 1; j <= n && j < static_cast<int>(weights.size()); ++j) {
    power = power * t;
    out += power * weights[j];
  }
  return out;
}

PowerSeries2 without_constant(const PowerSeries2& f, cplx scale) {
  PowerSeries2 t = f * scale;
  t.set(0, 0, 0.0);
  t.set_real_tag(f.real_tag() && scale.imag() == 0.0);
  return t;
}

}  // namespace

PowerSeries2 reciprocal(const PowerSeries2& f) {
  const cplx a0 = f.constant_term();
  if (std::abs(a0) == 0.0) fail(ErrorKind::DomainError, "reciprocal: series has zero constant term");
  const int n = f.max_degree();
  const PowerSeries2 t = without_constant(f, 1.0 / a0);
  std::vector<cplx> w(n + 1);
  for (int j = 0; j <= n; ++j) w[j] = (j % 2 == 0 ? 1.0 : -1.0) / a0;
  PowerSeries2 out = compose_nilpotent(t, w);
  if (f.real_tag()) out.symmetrize();
  return out;
}

PowerSeries2 log(const PowerSeries2& f) {
  const cplx a0 = f.constant_term();
  if (std::abs(a0) == 0.0) fail(ErrorKind::DomainError, "log: series has zero constant term");
  const int n = f.max_degree();
  const PowerSeries2 t = without_constant(f, 1.0 / a0);
  std::vector<cplx> w(n + 1);
  w[0] = std::log(a0);
  for (int j = 1; j <= n; ++j) w[j] = (j % 2 == 1 ? 1.0 : -1.0) / static_cast<double>(j);
  PowerSeries2 out = compose_nilpotent(t, w);
  if (f.real_tag() && a0.real() > 0.0) out.symmetrize();
  return out;
}

PowerSeries2 exp(const PowerSeries2& f) {
  const int n = f.max_degree();
  const cplx a0 = f.constant_term();
  const PowerSeries2 t = without_constant(f, 1.0);
  std::vector<cplx> w(n + 1);
  double fact = 1.0;
  const cplx e0 = std::exp(a0);
  for (int j = 0; j <= n; ++j) {
    if (j > 0) fact *= j;
    w[j] = e0 / fact;
  }
  PowerSeries2 out = compose_nilpotent(t, w);
  if (f.real_tag()) out.symmetrize();
  return out;
}

}  // namespace umbilic
