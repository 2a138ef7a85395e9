#include <doctest.h>

#include <cmath>
#include <random>

#include "umbilic/errors.hpp"
#include "umbilic/periodic_field.hpp"
#include "umbilic/pointwise.hpp"
#include "umbilic/power_series.hpp"

using namespace umbilic;

namespace {

constexpr double kPi = 3.14159265358979323846;

double max_diff(const PeriodicField& a, const std::function<cplx(double, double)>& fn) {
  double m = 0.0;
  for (int i = 0; i < a.n(); ++i)
    for (int j = 0; j < a.n(); ++j) m = std::max(m, std::abs(a.at(i, j) - fn(a.s_of(j), a.t_of(i))));
  return m;
}

// Random real band-limited field with modes |j|,|k| <= b.
PeriodicField random_field(const TorusLattice& lat, int n, int b, std::mt19937_64& rng, double amp = 0.3) {
  std::uniform_real_distribution<double> U(-amp, amp);
  std::vector<std::tuple<int, int, double, double>> modes;
  for (int j = -b; j <= b; ++j)
    for (int k = 0; k <= b; ++k) modes.emplace_back(j, k, U(rng), U(rng));
  return PeriodicField::from_function(
      lat, n,
      [&](double s, double t) {
        double v = 0.0;
        for (auto [j, k, a, c] : modes) v += a * std::cos(2 * kPi * (j * s + k * t)) + c * std::sin(2 * kPi * (j * s + k * t));
        return cplx(v, 0.0);
      },
      true);
}

}  // namespace

TEST_CASE("D of sin(2 pi s) on the square torus") {
  const TorusLattice lat(cplx(0, 1));
  auto f = PeriodicField::from_function(lat, 64, [](double s, double) { return cplx(std::sin(2 * kPi * s)); }, true);
  const auto df = wirtinger_d(f);
  CHECK(max_diff(df, [](double s, double) { return cplx(kPi * std::cos(2 * kPi * s)); }) <= 1e-10);
}

TEST_CASE("derivative of a constant is exactly zero") {
  const TorusLattice lat(cplx(0.3, 1.1));
  auto f = PeriodicField::constant(lat, 64, 2.5);
  const PeriodicField d = wirtinger_d(f), db = wirtinger_dbar(f);
  for (cplx v : d.values()) CHECK(v == cplx{});
  for (cplx v : db.values()) CHECK(v == cplx{});
}

TEST_CASE("D Dbar of a product of sines is -2 pi^2 times the field") {
  const TorusLattice lat(cplx(0, 1));
  auto fn = [](double s, double t) { return cplx(std::sin(2 * kPi * s) * std::sin(2 * kPi * t)); };
  auto f = PeriodicField::from_function(lat, 64, fn, true);
  const auto lap = wirtinger_d(wirtinger_dbar(f));
  CHECK(max_diff(lap, [&](double s, double t) { return -2 * kPi * kPi * fn(s, t); }) <= 1e-9);
}

TEST_CASE("single Fourier modes differentiate exactly on an oblique lattice") {
  const cplx omega(0.3, 1.1);
  const TorusLattice lat(omega);
  // Chain-rule oracle: s = x - (Re w / Im w) y, t = y / Im w.
  for (auto [j, k] : {std::pair{1, 0}, std::pair{0, 1}, std::pair{2, -3}, std::pair{-4, 5}}) {
    auto mode = [=](double s, double t) { return std::polar(1.0, 2 * kPi * (j * s + k * t)); };
    auto f = PeriodicField::from_function(lat, 64, mode, false);
    const cplx dx = cplx(0, 2 * kPi * j);
    const cplx dy = cplx(0, 2 * kPi * (-j * omega.real() / omega.imag() + k / omega.imag()));
    const cplx d_factor = 0.5 * (dx - cplx(0, 1) * dy);
    const cplx dbar_factor = 0.5 * (dx + cplx(0, 1) * dy);
    CHECK(max_diff(wirtinger_d(f), [&](double s, double t) { return d_factor * mode(s, t); }) <= 1e-11 * std::abs(d_factor));
    CHECK(max_diff(wirtinger_dbar(f), [&](double s, double t) { return dbar_factor * mode(s, t); }) <=
          1e-11 * (1.0 + std::abs(dbar_factor)));
  }
}

TEST_CASE("mixed partials commute and D, Dbar are conjugate on real fields") {
  std::mt19937_64 rng(7);
  for (cplx omega : {cplx(0, 1), cplx(0.3, 1.1)}) {
    const TorusLattice lat(omega);
    const auto f = random_field(lat, 64, 4, rng);
    const auto a = wirtinger_dbar(wirtinger_d(f));
    const auto b = wirtinger_d(wirtinger_dbar(f));
    CHECK((a - b).sup_norm() <= 1e-10 * a.sup_norm());
    const auto d = wirtinger_d(f);
    const auto db = wirtinger_dbar(f);
    double m = 0.0;
    for (std::size_t q = 0; q < d.values().size(); ++q) m = std::max(m, std::abs(db.values()[q] - std::conj(d.values()[q])));
    CHECK(m <= 1e-12);
  }
}

TEST_CASE("Leibniz rule with dealiased products") {
  std::mt19937_64 rng(11);
  const TorusLattice lat(cplx(0.3, 1.1));
  const auto f = random_field(lat, 64, 4, rng);
  const auto g = random_field(lat, 64, 4, rng);
  const auto lhs = wirtinger_d(f * g);
  const auto rhs = f * wirtinger_d(g) + g * wirtinger_d(f);
  CHECK((lhs - rhs).sup_norm() <= 1e-9);
}

TEST_CASE("under-resolved fields are rejected") {
  const TorusLattice lat(cplx(0, 1));
  auto f = PeriodicField::from_function(lat, 64, [](double s, double t) { return cplx(std::cos(2 * kPi * (28 * s + 27 * t))); }, true);
  CHECK(f.tail_energy_fraction() > 0.5);
  try {
    (void)wirtinger_d(f);
    FAIL("expected UnderResolved");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnderResolved);
  }
}

TEST_CASE("spectral interpolant reproduces a trigonometric polynomial off the grid") {
  const TorusLattice lat(cplx(0.3, 1.1));
  auto fn = [](double s, double t) { return cplx(0.2 * std::cos(2 * kPi * (s - 2 * t)) + 0.1 * std::sin(6 * kPi * t)); };
  auto f = PeriodicField::from_function(lat, 64, fn, true);
  for (double s : {0.013, 0.5, 0.77})
    for (double t : {0.031, 0.42, 0.999}) CHECK(std::abs(f.evaluate(s, t) - fn(s, t)) <= 1e-13);
}

TEST_CASE("series derivatives of monomials") {
  const auto f = PowerSeries2::monomial(2, 1, 1.0, 4);
  const auto d = wirtinger_d(f);
  const auto db = wirtinger_dbar(f);
  CHECK(d.coeff(1, 1) == cplx(2.0));
  CHECK(d.max_abs() == 2.0);
  CHECK(db.coeff(2, 0) == cplx(1.0));
  CHECK(db.max_abs() == 1.0);
  CHECK(wirtinger_d(PowerSeries2::constant(3.0, 4)).max_abs() == 0.0);
}

TEST_CASE("series Leibniz rule is exact below truncation") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  PowerSeries2 a(6), b(6);
  for (int d = 0; d <= 6; ++d)
    for (int l = 0; l <= d; ++l) {
      a.set(d - l, l, {U(rng), U(rng)});
      b.set(d - l, l, {U(rng), U(rng)});
    }
  const auto lhs = wirtinger_d(a * b);
  const auto rhs = a * wirtinger_d(b) + b * wirtinger_d(a);
  // D lowers degree by one, so products agree through degree 5.
  CHECK((lhs - rhs).max_abs(5) <= 1e-14);
}

TEST_CASE("series evaluation") {
  const auto f = PowerSeries2::monomial(1, 0, 1.0, 3) + PowerSeries2::monomial(0, 1, 1.0, 3);
  CHECK(std::abs(series_eval(f, cplx(1, 2)) - cplx(2.0)) <= 1e-15);
  CHECK(std::abs(series_eval(PowerSeries2::monomial(1, 1, 1.0, 3), cplx(0, 3)) - cplx(9.0)) <= 1e-14);
  CHECK(series_eval(PowerSeries2(5), cplx(0.3, -2)) == cplx{});
}

TEST_CASE("series reciprocal, log and exp") {
  PowerSeries2 f = PowerSeries2::constant(2.0, 6) + PowerSeries2::monomial(1, 1, 0.5, 6) + PowerSeries2::monomial(2, 0, 0.25, 6);
  const auto one = f * reciprocal(f);
  CHECK(std::abs(one.coeff(0, 0) - 1.0) <= 1e-15);
  CHECK((one - PowerSeries2::constant(1.0, 6)).max_abs() <= 1e-14);
  CHECK((exp(log(f)) - f).max_abs() <= 1e-13);
}

TEST_CASE("pointwise maps") {
  const TorusLattice lat(cplx(0, 1));
  std::vector<PeriodicField> zero{PeriodicField::constant(lat, 8, 0.0)};
  const PeriodicField e1 = pointwise_map(zero, PointwiseOp::Exp);
  for (cplx v : e1.values()) CHECK(v == cplx(1.0));
  std::vector<PeriodicField> two{PeriodicField::constant(lat, 8, 2.0)};
  const PeriodicField half = pointwise_map(two, PointwiseOp::Reciprocal);
  for (cplx v : half.values()) CHECK(v == cplx(0.5));

  std::mt19937_64 rng(3);
  std::vector<PeriodicField> f{random_field(lat, 64, 3, rng)};
  std::vector<PeriodicField> e{pointwise_map(f, PointwiseOp::Exp)};
  CHECK((pointwise_map(e, PointwiseOp::Log) - f[0]).sup_norm() <= 1e-12);

  try {
    (void)pointwise_map(zero, PointwiseOp::Log);
    FAIL("expected a domain error");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::DomainError);
  }
}
