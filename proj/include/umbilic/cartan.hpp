#pragma once

// Cartan's umbilical invariant r = Pu for unit circle bundles, with the
// curvature quantities it is built from. Every formula is written once as a
// template over the field representation; PeriodicField (spectral),
// PowerSeries2 (formal jets) and ChartGrid (finite differences) all provide
// wirtinger_d, wirtinger_dbar, exp, log and the arithmetic operators.

#include <algorithm>
#include <cmath>
#include <string_view>

#include "umbilic/chart_grid.hpp"
#include "umbilic/errors.hpp"
#include "umbilic/periodic_field.hpp"
#include "umbilic/power_series.hpp"

namespace umbilic {

enum class RForm { q_form, p_form, divergence_form };

std::string_view to_string(RForm form);
RForm rform_from_string(std::string_view name);

enum class MetricKind { metric_h, potential_u, rigid_F };

inline double sup_norm(const PeriodicField& f) { return f.sup_norm(); }
inline double sup_norm(const ChartGrid& f) { return f.sup_norm(); }
inline double sup_norm(const PowerSeries2& f) { return f.max_abs(); }

/// Drops rounding-level imaginary parts of a field known to be real.
PeriodicField as_real(const PeriodicField& f);
ChartGrid as_real(const ChartGrid& f);
PowerSeries2 as_real(const PowerSeries2& f);

/// Real parts of all samples/coefficient values must be positive.
bool strictly_positive(const PeriodicField& f);
bool strictly_positive(const ChartGrid& f);
bool strictly_positive(const PowerSeries2& f);

/// r from q = Du: D^2 Dbar q - 3 q D Dbar q + 2 q^2 Dbar q - Dq Dbar q.
template <class F>
F r_from_q(const F& q) {
  const F dq = wirtinger_d(q);
  const F dbq = wirtinger_dbar(q);
  const F ddbq = wirtinger_d(dbq);
  const F d2dbq = wirtinger_d(ddbq);
  return d2dbq - 3.0 * (q * ddbq) + 2.0 * ((q * q) * dbq) - dq * dbq;
}

/// Pu = D^3 Dbar u - 3 (Du) D^2 Dbar u + 2 (Du)^2 D Dbar u - (D^2 u) D Dbar u.
template <class F>
F p_operator(const F& u) {
  const F du = wirtinger_d(u);
  const F d2u = wirtinger_d(du);
  const F ddbu = wirtinger_dbar(du);
  const F d2dbu = wirtinger_d(ddbu);
  const F d3dbu = wirtinger_d(d2dbu);
  return d3dbu - 3.0 * (du * d2dbu) + 2.0 * ((du * du) * ddbu) - d2u * ddbu;
}

/// Pu = e^{2u} D(e^{-u} D(e^{-u} D Dbar u)).
template <class F>
F p_divergence(const F& u) {
  const F emu = exp(u * -1.0);
  const F ddbu = wirtinger_d(wirtinger_dbar(u));
  const F v = emu * ddbu;
  const F inner = emu * wirtinger_d(v);
  return exp(u * 2.0) * wirtinger_d(inner);
}

template <class F>
F cartan_r(const F& u, RForm form) {
  switch (form) {
    case RForm::q_form:
      return r_from_q(wirtinger_d(u));
    case RForm::p_form:
      return p_operator(u);
    case RForm::divergence_form:
      return p_divergence(u);
  }
  return p_operator(u);
}

/// Relative sup-distance |a - b|_inf / max(|a|_inf, |b|_inf), 0 for two zero fields.
template <class F>
double relative_sup_error(const F& a, const F& b) {
  const double scale = std::max(sup_norm(a), sup_norm(b));
  const double diff = sup_norm(a - b);
  return scale > 0.0 ? diff / scale : diff;
}

/// Computes r in the requested form and cross-checks it against the other two;
/// disagreement beyond `tolerance` (relative to 1 + |r|_inf) is an error.
template <class F>
F checked_cartan_r(const F& u, RForm form, double tolerance) {
  const F r = cartan_r(u, form);
  const double scale = 1.0 + sup_norm(r);
  for (RForm other : {RForm::q_form, RForm::p_form, RForm::divergence_form}) {
    if (other == form) continue;
    const double diff = sup_norm(r - cartan_r(u, other));
    if (diff > tolerance * scale)
      fail(ErrorKind::FormDisagreement, std::string("cartan_r: ") + std::string(to_string(form)) + " and " +
                                            std::string(to_string(other)) + " disagree by " +
                                            std::to_string(diff / scale));
  }
  return r;
}

/// Gauss curvature K = -2 e^{-u} D Dbar u of the metric e^u |dz|^2.
template <class F>
F gauss_curvature(const F& u) {
  return as_real(exp(u * -1.0) * wirtinger_d(wirtinger_dbar(u)) * -2.0);
}

/// f_{;zz} = e^{-2 phi} (D^2 f - 2 (D phi)(D f)) for the metric e^{2 phi}|dz|^2.
template <class F>
F covariant_hessian_zz(const F& f, const F& phi) {
  const F df = wirtinger_d(f);
  return exp(phi * -2.0) * (wirtinger_d(df) - 2.0 * (wirtinger_d(phi) * df));
}

/// K_{;zz} of the metric e^u |dz|^2 (so phi = u/2).
template <class F>
F curvature_hessian_zz(const F& u) {
  return covariant_hessian_zz(gauss_curvature(u), u * 0.5);
}

/// Field Pu + (e^{2u}/2) K_{;zz}, which vanishes identically.
template <class F>
F kzz_identity_defect(const F& u) {
  return p_operator(u) + (exp(u * 2.0) * 0.5) * curvature_hessian_zz(u);
}

template <class F>
double kzz_identity_residual(const F& u) {
  return sup_norm(kzz_identity_defect(u));
}

/// Locally-spherical test: |K_{;zz}|_inf <= tol (1 + |K|_inf).
template <class F>
bool spherical_test(const F& u, double tol) {
  return sup_norm(curvature_hessian_zz(u)) <= tol * (1.0 + sup_norm(gauss_curvature(u)));
}

/// u = log(-D Dbar log h); throws NotPseudoconvex when -D Dbar log h <= 0.
template <class F>
F potential_from_metric(const F& h) {
  if (!strictly_positive(h)) fail(ErrorKind::NotPseudoconvex, "metric h must be strictly positive");
  const F curvature = as_real(wirtinger_d(wirtinger_dbar(log(h))) * -1.0);
  if (!strictly_positive(curvature))
    fail(ErrorKind::NotPseudoconvex, "-D Dbar log h is not positive: circle bundle is not strictly pseudoconvex");
  return as_real(log(curvature));
}

/// u = log F_{z zbar} for a rigid hypersurface Im w = F(z, zbar).
template <class F>
F potential_from_rigid(const F& rigid) {
  const F fzzb = as_real(wirtinger_d(wirtinger_dbar(rigid)));
  if (!strictly_positive(fzzb)) fail(ErrorKind::NotPseudoconvex, "F_{z zbar} must be positive");
  return as_real(log(fzzb));
}

template <class F>
struct MetricInput {
  MetricKind kind;
  F payload;
};

template <class F>
struct InvariantField {
  F r;
  F u_used;
  RForm form_used;
};

template <class F>
F to_potential(const MetricInput<F>& input) {
  switch (input.kind) {
    case MetricKind::metric_h:
      return potential_from_metric(input.payload);
    case MetricKind::rigid_F:
      return potential_from_rigid(input.payload);
    case MetricKind::potential_u:
      if (!input.payload.real_tag()) fail(ErrorKind::InvalidArgument, "potential u must be real-tagged");
      return input.payload;
  }
  return input.payload;
}

template <class F>
InvariantField<F> cartan_invariant(const MetricInput<F>& input, RForm form) {
  F u = to_potential(input);
  F r = cartan_r(u, form);
  return {std::move(r), std::move(u), form};
}

/// Formal r of a rigid normal form Im w = F(z, zbar) with F = |z|^2 + O(|z|^4).
/// q = F_{zz zbar}/F_{z zbar} by Neumann-series inversion; the result is exact
/// through degree max_degree(F) - 6.
PowerSeries2 rigid_r_from_F(const PowerSeries2& rigid);

// Chart pipelines on closed-form potentials: every sample is the constant term
// of the formula applied to the local jet, so no discretization error enters.

/// Jet of u = log(-D Dbar log h) from a jet of h.
JetFunction potential_jet_from_metric(JetFunction h_jet);

ChartGrid chart_cartan_r(const JetFunction& u_jet, std::string chart_id, double radius, int n,
                         RForm form = RForm::p_form);
ChartGrid chart_gauss_curvature(const JetFunction& u_jet, std::string chart_id, double radius, int n);
ChartGrid chart_curvature_hessian_zz(const JetFunction& u_jet, std::string chart_id, double radius, int n);
cplx jet_cartan_r(const JetFunction& u_jet, cplx z, RForm form = RForm::p_form);

/// Fubini-Study chart potential u = log d - 2 log(1 + |z|^2) (curvature 4/d).
JetFunction fubini_study_jet(double degree);
/// Disk potential u = -2 log(1 - |z|^2), constant curvature -4.
JetFunction hyperbolic_jet();

}  // namespace umbilic
