#include <doctest.h>

#include <cmath>
#include <random>

#include "umbilic/cartan.hpp"

using namespace umbilic;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Mode {
  int j, k;
  cplx c;
};

// u = sum c e^{i theta} + conj, theta = 2 pi (j s + k t).
struct TrigOracle {
  cplx omega;
  std::vector<Mode> modes;

  double theta_x(const Mode& m) const { return 2 * kPi * m.j; }
  double theta_y(const Mode& m) const { return 2 * kPi * (-m.j * omega.real() + m.k) / omega.imag(); }

  double value(double s, double t) const {
    double v = 0.0;
    for (const auto& m : modes) v += 2.0 * (m.c * std::polar(1.0, 2 * kPi * (m.j * s + m.k * t))).real();
    return v;
  }

  // D^p Dbar^q u at (s, t), from the closed form of each exponential.
  cplx deriv(int p, int q, double s, double t) const {
    cplx acc{};
    const cplx I(0, 1);
    for (const auto& m : modes) {
      const cplx a = 0.5 * (theta_x(m) - I * theta_y(m));
      const cplx b = 0.5 * (theta_x(m) + I * theta_y(m));
      const cplx e = m.c * std::polar(1.0, 2 * kPi * (m.j * s + m.k * t));
      acc += e * std::pow(I * a, p) * std::pow(I * b, q) + std::conj(e) * std::pow(-I * a, p) * std::pow(-I * b, q);
    }
    return acc;
  }

  cplx p_u(double s, double t) const {
    return deriv(3, 1, s, t) - 3.0 * deriv(1, 0, s, t) * deriv(2, 1, s, t) +
           2.0 * deriv(1, 0, s, t) * deriv(1, 0, s, t) * deriv(1, 1, s, t) - deriv(2, 0, s, t) * deriv(1, 1, s, t);
  }

  PeriodicField sample(int n) const {
    return PeriodicField::from_function(TorusLattice(omega), n, [&](double s, double t) { return cplx(value(s, t)); }, true);
  }
};

TrigOracle random_potential(cplx omega, int budget, double amplitude, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1, 1);
  TrigOracle o{omega, {}};
  for (int j = -budget; j <= budget; ++j)
    for (int k = 0; k <= budget; ++k) {
      if (k == 0 && j <= 0) continue;
      o.modes.push_back({j, k, amplitude * cplx(U(rng), U(rng)) / 2.0});
    }
  return o;
}

PowerSeries2 jet_of(const std::function<PowerSeries2(const PowerSeries2&, const PowerSeries2&)>& fn, cplx z0, int n) {
  return fn(PowerSeries2::z_about(z0, n), PowerSeries2::zbar_about(z0, n));
}

}  // namespace

TEST_CASE("r of the trigonometric potential matches the closed-form derivative oracle") {
  std::mt19937_64 rng(2024);
  for (cplx omega : {cplx(0, 1), cplx(0.3, 1.1)}) {
    const TrigOracle o = random_potential(omega, 2, 0.4, rng);
    const PeriodicField u = o.sample(128);
    const PeriodicField r = cartan_r(u, RForm::p_form);
    double err = 0.0, scale = 0.0;
    for (int i = 0; i < 128; i += 3)
      for (int j = 0; j < 128; j += 5) {
        const cplx exact = o.p_u(r.s_of(j), r.t_of(i));
        err = std::max(err, std::abs(r.at(i, j) - exact));
        scale = std::max(scale, std::abs(exact));
      }
    CHECK(scale > 1.0);
    CHECK(err <= 1e-9 * scale);
  }
}

TEST_CASE("three forms of r agree on the two-mode torus example") {
  const TrigOracle o{cplx(0, 1), {{1, 0, 0.15}, {0, 1, cplx(0, -0.1)}}};  // 0.3 cos 2 pi s + 0.2 sin 2 pi t
  const PeriodicField u = o.sample(128);
  CHECK(std::abs(u.at(0, 0) - 0.3) < 1e-15);
  const auto q = cartan_r(u, RForm::q_form);
  const auto p = cartan_r(u, RForm::p_form);
  const auto d = cartan_r(u, RForm::divergence_form);
  CHECK(relative_sup_error(q, p) <= 1e-7);
  CHECK(relative_sup_error(d, p) <= 1e-7);
  CHECK_NOTHROW(checked_cartan_r(u, RForm::q_form, 1e-7));
}

TEST_CASE("constant potentials give r identically zero") {
  for (double c : {0.0, -3.0, 7.5}) {
    auto u = PeriodicField::constant(TorusLattice(cplx(0.3, 1.1)), 64, c);
    u.set_real_tag(true);
    for (RForm f : {RForm::q_form, RForm::p_form, RForm::divergence_form}) CHECK(cartan_r(u, f).sup_norm() <= 1e-10);
    CHECK(kzz_identity_residual(u) == 0.0);
    CHECK(spherical_test(u, 1e-9));
  }
}

TEST_CASE("Fubini-Study chart potential has r = 0 and curvature 4/d") {
  for (double d : {1.0, 2.0, 3.0}) {
    const JetFunction jet = fubini_study_jet(d);
    for (RForm f : {RForm::q_form, RForm::p_form, RForm::divergence_form})
      CHECK(chart_cartan_r(jet, "z", 1.0, 33, f).sup_norm() <= 1e-8);
    const ChartGrid k = chart_gauss_curvature(jet, "z", 1.0, 33);
    for (int i = 0; i < k.n(); ++i)
      for (int j = 0; j < k.n(); ++j)
        if (k.in_mask(i, j)) CHECK(std::abs(k.at(i, j) - 4.0 / d) <= 1e-8);
    const auto u = jet(cplx(0.3, -0.4), 6);
    CHECK(std::abs(kzz_identity_defect(u).constant_term()) <= 1e-8);
    CHECK(spherical_test(u.truncated(4), 1e-9));
  }
}

TEST_CASE("hyperbolic potential has curvature -4 inside |z| <= 0.8") {
  const JetFunction jet = hyperbolic_jet();
  for (double rho : {0.0, 0.3, 0.6, 0.8})
    for (double arg : {0.0, 1.0, 2.5}) {
      const cplx z = std::polar(rho, arg);
      CHECK(std::abs(gauss_curvature(jet(z, 4)).constant_term() + 4.0) <= 1e-8);
      CHECK(std::abs(jet_cartan_r(jet, z)) <= 1e-8);
    }
  CHECK_THROWS_AS(jet(cplx(1.0, 0.0), 4), Error);
}

TEST_CASE("flat metric has zero curvature") {
  auto u = PeriodicField::constant(TorusLattice(cplx(0, 1)), 64, 0.0);
  u.set_real_tag(true);
  const PeriodicField k = gauss_curvature(u);
  for (cplx v : k.values()) CHECK(v == cplx{});
}

TEST_CASE("potential from a bundle metric") {
  // h = e^{-|z|^2}: u = log 1 = 0.
  const JetFunction gauss_h = [](cplx z0, int n) {
    return jet_of([](const PowerSeries2& z, const PowerSeries2& zb) {
      auto e = (z * zb) * -1.0;
      e.symmetrize();
      return exp(e);
    }, z0, n);
  };
  const JetFunction u1 = potential_jet_from_metric(gauss_h);
  for (cplx z : {cplx(0), cplx(0.5, -0.2), cplx(-1.3, 0.7)}) CHECK(std::abs(u1(z, 4).constant_term()) <= 1e-13);

  // h = (1+|z|^2)^{-1}: -D Dbar log h = (1+|z|^2)^{-2}.
  const JetFunction fs_h = [](cplx z0, int n) {
    return jet_of([](const PowerSeries2& z, const PowerSeries2& zb) {
      auto e = z * zb + cplx(1.0);
      e.symmetrize();
      return reciprocal(e);
    }, z0, n);
  };
  const JetFunction u2 = potential_jet_from_metric(fs_h);
  for (cplx z : {cplx(0), cplx(0.5, -0.2), cplx(-1.3, 0.7)})
    CHECK(std::abs(u2(z, 4).constant_term() - (-2.0 * std::log(1.0 + std::norm(z)))) <= 1e-13);

  // Sampled version of the first example.
  const ChartGrid h = ChartGrid::from_function("z", 1.0, 65, [](cplx z) { return cplx(std::exp(-std::norm(z))); }, true);
  const ChartGrid u = potential_from_metric(h);
  CHECK(u.sup_norm_within(0.9) <= 1e-6);

  // h = e^{+|z|^2} is not pseudoconvex.
  const JetFunction bad_h = [](cplx z0, int n) {
    return jet_of([](const PowerSeries2& z, const PowerSeries2& zb) {
      auto e = z * zb;
      e.symmetrize();
      return exp(e);
    }, z0, n);
  };
  try {
    (void)potential_jet_from_metric(bad_h)(cplx(0.1, 0.1), 4);
    FAIL("expected NotPseudoconvex");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotPseudoconvex);
  }
}

TEST_CASE("covariant Hessian on simple jets") {
  const auto z = PowerSeries2::z_about(cplx(0.2, 0.1), 4);
  const auto zb = PowerSeries2::zbar_about(cplx(0.2, 0.1), 4);
  auto re_z2 = (z * z + zb * zb) * 0.5;
  re_z2.symmetrize();
  auto mod2 = z * zb;
  mod2.symmetrize();
  const PowerSeries2 zero(4, true);
  CHECK(std::abs(covariant_hessian_zz(re_z2, zero).constant_term() - 1.0) <= 1e-15);
  CHECK(std::abs(covariant_hessian_zz(mod2, zero).constant_term()) <= 1e-15);
}

TEST_CASE("covariant Hessian matches a fourth-order finite-difference oracle") {
  std::mt19937_64 rng(99);
  const cplx omega(0.3, 1.1);
  const TorusLattice lat(omega);
  const TrigOracle f = random_potential(omega, 2, 0.3, rng);
  const TrigOracle phi = random_potential(omega, 2, 0.3, rng);
  const PeriodicField ff = f.sample(128), pp = phi.sample(128);
  const PeriodicField hess = covariant_hessian_zz(ff, pp);

  auto at_xy = [&](const TrigOracle& o, double x, double y) {
    double s, t;
    lat.st_of(cplx(x, y), s, t);
    return o.value(s, t);
  };
  const double h = 2e-4;
  const double w[4] = {1.0 / 12, -8.0 / 12, 8.0 / 12, -1.0 / 12};
  const int off[4] = {-2, -1, 1, 2};
  auto d1 = [&](const TrigOracle& o, double x, double y, bool along_x) {
    double acc = 0;
    for (int a = 0; a < 4; ++a) acc += w[a] * (along_x ? at_xy(o, x + off[a] * h, y) : at_xy(o, x, y + off[a] * h));
    return acc / h;
  };
  auto d2 = [&](const TrigOracle& o, double x, double y, int kind) {
    const double c[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
    double acc = 0;
    if (kind == 0)
      for (int a = -2; a <= 2; ++a) acc += c[a + 2] * at_xy(o, x + a * h, y);
    else if (kind == 1)
      for (int a = -2; a <= 2; ++a) acc += c[a + 2] * at_xy(o, x, y + a * h);
    else
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) acc += w[a] * w[b] * at_xy(o, x + off[a] * h, y + off[b] * h);
    return acc / (h * h);
  };

  double err = 0.0, scale = 0.0;
  for (int i = 0; i < 128; i += 17)
    for (int j = 0; j < 128; j += 13) {
      const cplx z = hess.z_at(i, j);
      const double x = z.real(), y = z.imag();
      const cplx I(0, 1);
      const cplx df = 0.5 * (d1(f, x, y, true) - I * d1(f, x, y, false));
      const cplx dphi = 0.5 * (d1(phi, x, y, true) - I * d1(phi, x, y, false));
      const cplx d2f = 0.25 * (d2(f, x, y, 0) - 2.0 * I * d2(f, x, y, 2) - d2(f, x, y, 1));
      const cplx oracle = std::exp(-2.0 * phi.value(ff.s_of(j), ff.t_of(i))) * (d2f - 2.0 * dphi * df);
      err = std::max(err, std::abs(hess.at(i, j) - oracle));
      scale = std::max(scale, std::abs(oracle));
    }
  CHECK(scale > 0.1);
  CHECK(err <= 1e-6);
}

TEST_CASE("curvature identity Pu = -(e^{2u}/2) K_zz") {
  const TrigOracle o{cplx(0, 1), {{1, 0, 0.125}, {0, 1, 0.075}}};  // 0.25 cos 2 pi s + 0.15 cos 2 pi t
  const PeriodicField u = o.sample(128);
  const double rs = cartan_r(u, RForm::p_form).sup_norm();
  CHECK(kzz_identity_residual(u) <= 1e-7 * rs);
}

TEST_CASE("adding a constant to u does not change r") {
  std::mt19937_64 rng(17);
  const TrigOracle o = random_potential(cplx(0.3, 1.1), 3, 0.3, rng);
  const PeriodicField u = o.sample(128);
  const PeriodicField r = cartan_r(u, RForm::p_form);
  for (double c : {-3.0, 1.0, 10.0}) {
    PeriodicField shifted = u + cplx(c);
    shifted.set_real_tag(true);
    CHECK((cartan_r(shifted, RForm::p_form) - r).sup_norm() <= 1e-10 * (1.0 + r.sup_norm()));
  }
}

TEST_CASE("spherical test separates constant curvature from a perturbation") {
  const TrigOracle o{cplx(0, 1), {{1, 0, 0.15}}};
  PeriodicField u = o.sample(128) + cplx(2.0);
  u.set_real_tag(true);
  CHECK_FALSE(spherical_test(u, 1e-6));
}

TEST_CASE("rigid normal forms") {
  const int deg = 12;
  auto rigid = [&](double eps42, double eps22) {
    PowerSeries2 F = PowerSeries2::monomial(1, 1, 1.0, deg);
    F += PowerSeries2::monomial(2, 2, eps22, deg);
    F += PowerSeries2::monomial(4, 2, eps42, deg);
    F += PowerSeries2::monomial(2, 4, eps42, deg);
    F.symmetrize();
    return F;
  };
  CHECK(rigid_r_from_F(rigid(0.0, 0.0)).max_abs() == 0.0);
  CHECK(std::abs(rigid_r_from_F(rigid(0.0, 1.0)).constant_term()) <= 1e-14);
  // F_{z zbar} = 1 + eps (8 z^3 zbar + 8 z zbar^3) + ..., so q = eps (24 z^2 zbar + 8 zbar^3) + O(eps^2)
  // and r(0) = D^2 Dbar (24 eps z^2 zbar) = 48 eps.
  for (double eps : {1e-3, 0.01, 0.2}) CHECK(std::abs(rigid_r_from_F(rigid(eps, 0.0)).constant_term() - 48.0 * eps) <= 1e-12);
  CHECK_THROWS_AS(rigid_r_from_F(PowerSeries2::monomial(2, 0, 1.0, deg)), Error);
}

TEST_CASE("rigid r agrees with r of the bundle metric h = exp(-F)") {
  const double eps = 0.3, delta = 0.2;
  auto F_about = [&](const PowerSeries2& z, const PowerSeries2& zb) {
    auto z2 = z * z, zb2 = zb * zb;
    PowerSeries2 F = z * zb + (z2 * z2 * zb2 + z2 * zb2 * zb2) * eps + (z2 * z * zb + z * zb2 * zb) * delta;
    F.symmetrize();
    return F;
  };
  const PowerSeries2 F0 = jet_of(F_about, cplx(0), 18);
  const PowerSeries2 r_rigid = rigid_r_from_F(F0);
  const JetFunction h_jet = [&](cplx z0, int n) {
    auto e = jet_of(F_about, z0, n) * -1.0;
    e.symmetrize();
    return exp(e);
  };
  const JetFunction u_jet = potential_jet_from_metric(h_jet);
  for (cplx z : {cplx(0), cplx(0.05, 0.02), cplx(-0.08, 0.03), cplx(0.0, -0.1)})
    CHECK(std::abs(series_eval(r_rigid, z) - jet_cartan_r(u_jet, z)) <= 1e-6);
}
