#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "umbilic/power_series.hpp"

namespace umbilic {

/// Samples on the square [-R, R]^2 of a coordinate chart. Sample (i, j) sits at
/// x = -R + j*h, y = -R + i*h with h = 2R/(n-1); the mask marks |z| <= R.
class ChartGrid {
 public:
  ChartGrid(std::string chart_id, double radius, int n, std::vector<cplx> values, bool real_tag = false);

  static ChartGrid from_function(std::string chart_id, double radius, int n,
                                 const std::function<cplx(cplx z)>& fn, bool real_tag = false);

  const std::string& chart_id() const noexcept { return chart_id_; }
  double radius() const noexcept { return radius_; }
  int n() const noexcept { return n_; }
  double spacing() const noexcept { return 2.0 * radius_ / (n_ - 1); }
  bool real_tag() const noexcept { return real_tag_; }

  cplx z_at(int i, int j) const noexcept { return {-radius_ + j * spacing(), -radius_ + i * spacing()}; }
  bool in_mask(int i, int j) const noexcept { return std::abs(z_at(i, j)) <= radius_; }

  cplx at(int i, int j) const { return values_[static_cast<std::size_t>(i) * n_ + j]; }
  cplx& at(int i, int j) { return values_[static_cast<std::size_t>(i) * n_ + j]; }
  std::span<const cplx> values() const noexcept { return values_; }

  /// Sup-norm over masked samples.
  double sup_norm() const;
  /// Sup-norm of samples with |z| <= r (r <= radius).
  double sup_norm_within(double r) const;

  bool same_layout(const ChartGrid& other) const noexcept {
    return chart_id_ == other.chart_id_ && radius_ == other.radius_ && n_ == other.n_;
  }

  /// Bicubic (Catmull-Rom) interpolation; exact at grid nodes.
  cplx interpolate(cplx z) const;

 private:
  std::string chart_id_;
  double radius_;
  int n_;
  std::vector<cplx> values_;
  bool real_tag_;
};

/// Sixth-order finite-difference Wirtinger derivatives on a chart grid
/// (one-sided stencils near the edges of the square).
ChartGrid chart_derivative(const ChartGrid& f, Wirtinger direction);
inline ChartGrid wirtinger_d(const ChartGrid& f) { return chart_derivative(f, Wirtinger::D); }
inline ChartGrid wirtinger_dbar(const ChartGrid& f) { return chart_derivative(f, Wirtinger::Dbar); }

ChartGrid operator+(const ChartGrid& a, const ChartGrid& b);
ChartGrid operator-(const ChartGrid& a, const ChartGrid& b);
ChartGrid operator-(const ChartGrid& a);
ChartGrid operator*(const ChartGrid& a, const ChartGrid& b);
ChartGrid operator*(const ChartGrid& a, cplx s);
ChartGrid operator*(cplx s, const ChartGrid& a);
ChartGrid operator*(const ChartGrid& a, double s);
ChartGrid operator*(double s, const ChartGrid& a);
ChartGrid operator+(const ChartGrid& a, cplx s);
ChartGrid exp(const ChartGrid& f);
ChartGrid log(const ChartGrid& f);

/// Local expansion of a closed-form function: returns the Taylor jet in the
/// local variables (z - z0, zbar - conj(z0)) truncated at the given degree.
using JetFunction = std::function<PowerSeries2(cplx z0, int degree)>;

/// Samples of a jet-valued operator: out(z) = constant term of op(jet(z)).
ChartGrid sample_jet(std::string chart_id, double radius, int n, const JetFunction& jet, int degree,
                     const std::function<PowerSeries2(const PowerSeries2&)>& op, bool real_tag = false);

}  // namespace umbilic
