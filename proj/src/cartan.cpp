#include "umbilic/cartan.hpp"

#include <cmath>

namespace umbilic {

std::string_view to_string(RForm form) {
  switch (form) {
    case RForm::q_form:
      return "q_form";
    case RForm::p_form:
      return "p_form";
    case RForm::divergence_form:
      return "divergence_form";
  }
  return "p_form";
}

RForm rform_from_string(std::string_view name) {
  if (name == "q_form") return RForm::q_form;
  if (name == "p_form") return RForm::p_form;
  if (name == "divergence_form") return RForm::divergence_form;
  fail(ErrorKind::InvalidArgument, "unknown r form: " + std::string(name));
}

PeriodicField as_real(const PeriodicField& f) {
  std::vector<cplx> v(f.values().begin(), f.values().end());
  for (auto& x : v) x.imag(0.0);
  return PeriodicField(f.lattice(), f.n(), std::move(v), true);
}

ChartGrid as_real(const ChartGrid& f) {
  std::vector<cplx> v(f.values().begin(), f.values().end());
  for (auto& x : v) x.imag(0.0);
  return ChartGrid(f.chart_id(), f.radius(), f.n(), std::move(v), true);
}

PowerSeries2 as_real(const PowerSeries2& f) {
  PowerSeries2 out = f;
  out.symmetrize();
  return out;
}

bool strictly_positive(const PeriodicField& f) {
  for (const auto& x : f.values())
    if (!(x.real() > 0.0)) return false;
  return true;
}

bool strictly_positive(const ChartGrid& f) {
  for (const auto& x : f.values())
    if (!(x.real() > 0.0)) return false;
  return true;
}

bool strictly_positive(const PowerSeries2& f) { return f.constant_term().real() > 0.0; }

PowerSeries2 rigid_r_from_F(const PowerSeries2& rigid) {
  const int n = rigid.max_degree();
  if (n < 6) fail(ErrorKind::InvalidArgument, "rigid_r_from_F: F must be truncated at degree >= 6");
  if (rigid.hermitian_defect() > 1e-12 * (1.0 + rigid.max_abs()))
    fail(ErrorKind::InvalidArgument, "rigid_r_from_F: F must be real");
  if (std::abs(rigid.coeff(1, 1) - 1.0) > 1e-12)
    fail(ErrorKind::InvalidArgument, "rigid_r_from_F: coefficient of |z|^2 must be 1");
  for (int d = 0; d <= 3; ++d)
    for (int l = 0; l <= d; ++l) {
      if (d - l == 1 && l == 1) continue;
      if (std::abs(rigid.coeff(d - l, l)) > 1e-12)
        fail(ErrorKind::InvalidArgument, "rigid_r_from_F: F must be |z|^2 + O(|z|^4)");
    }
  const PowerSeries2 fzzb = wirtinger_d(wirtinger_dbar(rigid));
  const PowerSeries2 q = wirtinger_d(fzzb) * reciprocal(fzzb);
  return r_from_q(q);
}

JetFunction potential_jet_from_metric(JetFunction h_jet) {
  return [h_jet = std::move(h_jet)](cplx z0, int degree) {
    return potential_from_metric(h_jet(z0, degree + 2));
  };
}

ChartGrid chart_cartan_r(const JetFunction& u_jet, std::string chart_id, double radius, int n, RForm form) {
  return sample_jet(std::move(chart_id), radius, n, u_jet, 4,
                    [form](const PowerSeries2& u) { return cartan_r(u, form); });
}

ChartGrid chart_gauss_curvature(const JetFunction& u_jet, std::string chart_id, double radius, int n) {
  return sample_jet(
      std::move(chart_id), radius, n, u_jet, 2, [](const PowerSeries2& u) { return gauss_curvature(u); }, true);
}

ChartGrid chart_curvature_hessian_zz(const JetFunction& u_jet, std::string chart_id, double radius, int n) {
  return sample_jet(std::move(chart_id), radius, n, u_jet, 4,
                    [](const PowerSeries2& u) { return curvature_hessian_zz(u); });
}

cplx jet_cartan_r(const JetFunction& u_jet, cplx z, RForm form) {
  return cartan_r(u_jet(z, 4), form).constant_term();
}

JetFunction fubini_study_jet(double degree) {
  if (!(degree > 0.0)) fail(ErrorKind::InvalidArgument, "Fubini-Study degree must be positive");
  return [degree](cplx z0, int n) {
    const auto z = PowerSeries2::z_about(z0, n);
    const auto zb = PowerSeries2::zbar_about(z0, n);
    PowerSeries2 one_plus = z * zb + cplx(1.0);
    one_plus.symmetrize();
    return as_real(log(one_plus) * -2.0 + cplx(std::log(degree)));
  };
}

JetFunction hyperbolic_jet() {
  return [](cplx z0, int n) {
    if (std::abs(z0) >= 1.0) fail(ErrorKind::DomainError, "hyperbolic potential is defined on |z| < 1");
    const auto z = PowerSeries2::z_about(z0, n);
    const auto zb = PowerSeries2::zbar_about(z0, n);
    PowerSeries2 one_minus = (z * zb) * -1.0 + cplx(1.0);
    one_minus.symmetrize();
    return as_real(log(one_minus) * -2.0);
  };
}

}  // namespace umbilic
