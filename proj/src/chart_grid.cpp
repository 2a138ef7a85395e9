#include "umbilic/chart_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "umbilic/errors.hpp"

namespace umbilic {

ChartGrid::ChartGrid(std::string chart_id, double radius, int n, std::vector<cplx> values, bool real_tag)
    : chart_id_(std::move(chart_id)), radius_(radius), n_(n), values_(std::move(values)), real_tag_(real_tag) {
  if (!(radius > 0.0)) fail(ErrorKind::InvalidArgument, "chart radius must be positive");
  if (n < 8) fail(ErrorKind::InvalidArgument, "chart grid needs n >= 8");
  if (values_.size() != static_cast<std::size_t>(n) * n)
    fail(ErrorKind::InvalidArgument, "chart sample count does not match n*n");
}

ChartGrid ChartGrid::from_function(std::string chart_id, double radius, int n,
                                   const std::function<cplx(cplx)>& fn, bool real_tag) {
  std::vector<cplx> v(static_cast<std::size_t>(n) * n);
  const double h = 2.0 * radius / (n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cplx x = fn({-radius + j * h, -radius + i * h});
      if (real_tag) x.imag(0.0);
      v[static_cast<std::size_t>(i) * n + j] = x;
    }
  return ChartGrid(std::move(chart_id), radius, n, std::move(v), real_tag);
}

double ChartGrid::sup_norm() const { return sup_norm_within(radius_); }

double ChartGrid::sup_norm_within(double r) const {
  double m = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      if (std::abs(z_at(i, j)) <= r) m = std::max(m, std::abs(at(i, j)));
  return m;
}

cplx ChartGrid::interpolate(cplx z) const {
  const double h = spacing();
  double fx = (z.real() + radius_) / h;
  double fy = (z.imag() + radius_) / h;
  if (std::abs(fx - std::round(fx)) < 1e-9) fx = std::round(fx);
  if (std::abs(fy - std::round(fy)) < 1e-9) fy = std::round(fy);
  const int j0 = std::clamp(static_cast<int>(std::floor(fx)), 0, n_ - 2);
  const int i0 = std::clamp(static_cast<int>(std::floor(fy)), 0, n_ - 2);
  auto weights = [](double t) {
    const double t2 = t * t, t3 = t2 * t;
    return std::array<double, 4>{0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2),
                                 0.5 * (-3 * t3 + 4 * t2 + t), 0.5 * (t3 - t2)};
  };
  const auto wx = weights(fx - j0);
  const auto wy = weights(fy - i0);
  cplx acc{};
  for (int a = 0; a < 4; ++a) {
    const int i = std::clamp(i0 - 1 + a, 0, n_ - 1);
    cplx row{};
    for (int b = 0; b < 4; ++b) row += wx[b] * at(i, std::clamp(j0 - 1 + b, 0, n_ - 1));
    acc += wy[a] * row;
  }
  return acc;
}

namespace {

constexpr int kStencil = 7;

/// Fornberg weights for the first derivative at 0 from the given offsets.
std::array<double, kStencil> first_derivative_weights(const std::array<double, kStencil>& x) {
  // c[m][j]: weight of x[j] for the m-th derivative (m = 0, 1).
  double c[2][kStencil] = {};
  double c1 = 1.0;
  double c4 = x[0];
  c[0][0] = 1.0;
  for (int i = 1; i < kStencil; ++i) {
    const int mn = std::min(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i];
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  std::array<double, kStencil> w{};
  for (int j = 0; j < kStencil; ++j) w[j] = c[1][j];
  return w;
}

/// Derivative along one axis: returns d/dx (axis = 1) or d/dy (axis = 0).
std::vector<cplx> axis_derivative(const ChartGrid& f, int axis) {
  const int n = f.n();
  const double h = f.spacing();
  std::vector<cplx> out(static_cast<std::size_t>(n) * n);
  for (int p = 0; p < n; ++p) {
    const int start = std::clamp(p - kStencil / 2, 0, n - kStencil);
    std::array<double, kStencil> offs{};
    for (int k = 0; k < kStencil; ++k) offs[k] = static_cast<double>(start + k - p);
    auto w = first_derivative_weights(offs);
    for (auto& x : w) x /= h;
    for (int q = 0; q < n; ++q) {
      cplx acc{};
      for (int k = 0; k < kStencil; ++k)
        acc += w[k] * (axis == 1 ? f.at(q, start + k) : f.at(start + k, q));
      if (axis == 1)
        out[static_cast<std::size_t>(q) * n + p] = acc;
      else
        out[static_cast<std::size_t>(p) * n + q] = acc;
    }
  }
  return out;
}

void require_layout(const ChartGrid& a, const ChartGrid& b) {
  if (!a.same_layout(b)) fail(ErrorKind::InvalidArgument, "chart grids differ in chart or resolution");
}

template <class Op>
ChartGrid map_values(const ChartGrid& a, bool real, Op op) {
  std::vector<cplx> v(a.values().begin(), a.values().end());
  for (auto& x : v) x = op(x);
  return ChartGrid(a.chart_id(), a.radius(), a.n(), std::move(v), real);
}

}  // namespace

ChartGrid chart_derivative(const ChartGrid& f, Wirtinger direction) {
  if (f.n() < kStencil) fail(ErrorKind::InvalidArgument, "chart grid too small for derivative stencil");
  const auto dx = axis_derivative(f, 1);
  const auto dy = axis_derivative(f, 0);
  const cplx I(0.0, 1.0);
  const double sign = direction == Wirtinger::D ? -1.0 : 1.0;
  std::vector<cplx> v(dx.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = 0.5 * (dx[k] + sign * I * dy[k]);
  return ChartGrid(f.chart_id(), f.radius(), f.n(), std::move(v), false);
}

ChartGrid operator+(const ChartGrid& a, const ChartGrid& b) {
  require_layout(a, b);
  std::vector<cplx> v(a.values().begin(), a.values().end());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] += b.values()[k];
  return ChartGrid(a.chart_id(), a.radius(), a.n(), std::move(v), a.real_tag() && b.real_tag());
}

ChartGrid operator-(const ChartGrid& a, const ChartGrid& b) {
  require_layout(a, b);
  std::vector<cplx> v(a.values().begin(), a.values().end());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] -= b.values()[k];
  return ChartGrid(a.chart_id(), a.radius(), a.n(), std::move(v), a.real_tag() && b.real_tag());
}

ChartGrid operator-(const ChartGrid& a) { return a * -1.0; }

ChartGrid operator*(const ChartGrid& a, const ChartGrid& b) {
  require_layout(a, b);
  std::vector<cplx> v(a.values().begin(), a.values().end());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] *= b.values()[k];
  return ChartGrid(a.chart_id(), a.radius(), a.n(), std::move(v), a.real_tag() && b.real_tag());
}

ChartGrid operator*(const ChartGrid& a, cplx s) {
  return map_values(a, a.real_tag() && s.imag() == 0.0, [s](cplx x) { return x * s; });
}
ChartGrid operator*(cplx s, const ChartGrid& a) { return a * s; }
ChartGrid operator*(const ChartGrid& a, double s) { return a * cplx(s); }
ChartGrid operator*(double s, const ChartGrid& a) { return a * cplx(s); }

ChartGrid operator+(const ChartGrid& a, cplx s) {
  return map_values(a, a.real_tag() && s.imag() == 0.0, [s](cplx x) { return x + s; });
}

ChartGrid exp(const ChartGrid& f) {
  const bool real = f.real_tag();
  return map_values(f, real, [real](cplx x) { return real ? cplx(std::exp(x.real())) : std::exp(x); });
}

ChartGrid log(const ChartGrid& f) {
  bool real = f.real_tag();
  for (const auto& x : f.values()) {
    if (std::abs(x) < 1e-300) fail(ErrorKind::DomainError, "log of a chart field with a vanishing sample");
    if (x.real() <= 0.0) real = false;
  }
  return map_values(f, real, [real](cplx x) { return real ? cplx(std::log(x.real())) : std::log(x); });
}

ChartGrid sample_jet(std::string chart_id, double radius, int n, const JetFunction& jet, int degree,
                     const std::function<PowerSeries2(const PowerSeries2&)>& op, bool real_tag) {
  return ChartGrid::from_function(
      std::move(chart_id), radius, n, [&](cplx z) { return op(jet(z, degree)).constant_term(); }, real_tag);
}

}  // namespace umbilic
