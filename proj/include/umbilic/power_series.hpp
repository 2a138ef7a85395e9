#pragma once

#include <complex>
#include <vector>

namespace umbilic {

using cplx = std::complex<double>;

/// Truncated bivariate formal power series in (z, zbar).
///
/// Coefficients c(k, l) multiply z^k zbar^l and are stored densely for
/// k + l <= max_degree, grouped by total degree. The optional reality tag
/// records Hermitian symmetry c(l, k) == conj(c(k, l)), i.e. that the series
/// represents a real-valued function.
class PowerSeries2 {
 public:
  PowerSeries2() = default;
  explicit PowerSeries2(int max_degree, bool real_tag = false);

  static PowerSeries2 constant(cplx value, int max_degree);
  /// z0 + z as a series in the local variable z (expansion of z about z0).
  static PowerSeries2 z_about(cplx z0, int max_degree);
  /// conj(z0) + zbar.
  static PowerSeries2 zbar_about(cplx z0, int max_degree);
  static PowerSeries2 monomial(int k, int l, cplx coeff, int max_degree);

  int max_degree() const noexcept { return max_degree_; }
  bool real_tag() const noexcept { return real_tag_; }
  void set_real_tag(bool tag) noexcept { real_tag_ = tag; }

  /// Zero for indices outside the stored triangle.
  cplx coeff(int k, int l) const;
  void set(int k, int l, cplx value);
  void add_to(int k, int l, cplx value);

  cplx constant_term() const { return coeffs_.empty() ? cplx{} : coeffs_[0]; }

  /// Largest coefficient modulus over total degrees <= max_total.
  double max_abs(int max_total) const;
  double max_abs() const { return max_abs(max_degree_); }

  /// Largest |c(l,k) - conj(c(k,l))|.
  double hermitian_defect() const;
  /// Replaces the coefficients with their Hermitian average and sets the tag.
  void symmetrize();

  /// Same coefficients cut down to a lower truncation degree.
  PowerSeries2 truncated(int new_degree) const;
  /// Homogeneous part of total degree d.
  PowerSeries2 homogeneous_part(int d) const;

  PowerSeries2& operator+=(const PowerSeries2& other);
  PowerSeries2& operator-=(const PowerSeries2& other);
  PowerSeries2& operator*=(cplx s);

 private:
  static std::size_t index(int k, int l) {
    const int d = k + l;
    return static_cast<std::size_t>(d) * (d + 1) / 2 + l;
  }

  int max_degree_ = 0;
  bool real_tag_ = false;
  std::vector<cplx> coeffs_{cplx{}};
};

PowerSeries2 operator+(PowerSeries2 a, const PowerSeries2& b);
PowerSeries2 operator-(PowerSeries2 a, const PowerSeries2& b);
PowerSeries2 operator-(PowerSeries2 a);
PowerSeries2 operator*(const PowerSeries2& a, const PowerSeries2& b);
PowerSeries2 operator*(PowerSeries2 a, cplx s);
PowerSeries2 operator*(cplx s, PowerSeries2 a);
PowerSeries2 operator*(PowerSeries2 a, double s);
PowerSeries2 operator*(double s, PowerSeries2 a);
PowerSeries2 operator+(PowerSeries2 a, cplx s);
PowerSeries2 operator+(cplx s, PowerSeries2 a);

enum class Wirtinger { D, Dbar };

/// Exact formal differentiation; the truncation degree drops by one and the
/// reality tag is cleared.
PowerSeries2 series_derivative(const PowerSeries2& f, Wirtinger direction);

inline PowerSeries2 wirtinger_d(const PowerSeries2& f) { return series_derivative(f, Wirtinger::D); }
inline PowerSeries2 wirtinger_dbar(const PowerSeries2& f) { return series_derivative(f, Wirtinger::Dbar); }

cplx series_eval(const PowerSeries2& f, cplx z);

// Composition with analytic functions. The constant term must be admissible
// (nonzero for reciprocal, nonzero off the branch cut for log); everything
// else is exact through the truncation degree.
PowerSeries2 reciprocal(const PowerSeries2& f);
PowerSeries2 log(const PowerSeries2& f);
PowerSeries2 exp(const PowerSeries2& f);

}  // namespace umbilic
