#include "umbilic/loewner.hpp"

#include <algorithm>
#include <cmath>

#include "umbilic/errors.hpp"

namespace umbilic {

namespace {

constexpr double kSolveTolerance = 1e-9;

/// Complex coefficients c_k of z^k zbar^{M-k} (k = 0..M) for a real coordinate vector.
std::vector<cplx> homogeneous_coefficients(int degree, const std::vector<RealHomogeneousCoordinate>& basis,
                                           const Eigen::VectorXd& x, Eigen::Index offset) {
  std::vector<cplx> c(degree + 1);
  const cplx I(0.0, 1.0);
  for (std::size_t b = 0; b < basis.size(); ++b) {
    const double v = x[offset + static_cast<Eigen::Index>(b)];
    const int k = basis[b].k;
    switch (basis[b].part) {
      case 2:
        c[k] += v;
        break;
      case 0:
        c[k] += v;
        c[degree - k] += v;
        break;
      case 1:
        c[k] += I * v;
        c[degree - k] -= I * v;
        break;
    }
  }
  return c;
}

double value_or_zero(const std::vector<double>& v, int n) {
  return n >= 1 && n <= static_cast<int>(v.size()) ? v[n - 1] : 0.0;
}

}  // namespace

std::vector<RealHomogeneousCoordinate> real_homogeneous_basis(int degree) {
  if (degree < 0) fail(ErrorKind::InvalidArgument, "negative homogeneous degree");
  std::vector<RealHomogeneousCoordinate> basis;
  if (degree % 2 == 0) basis.push_back({degree / 2, 2});
  for (int k = degree / 2 + 1; k <= degree; ++k) {
    basis.push_back({k, 0});
    basis.push_back({k, 1});
  }
  return basis;
}

PowerSeries2 real_basis_polynomial(int degree, const RealHomogeneousCoordinate& coordinate) {
  PowerSeries2 p(degree, true);
  const int k = coordinate.k;
  const cplx I(0.0, 1.0);
  switch (coordinate.part) {
    case 2:
      p.set(k, degree - k, 1.0);
      break;
    case 0:
      p.set(k, degree - k, 1.0);
      p.set(degree - k, k, 1.0);
      break;
    case 1:
      p.set(k, degree - k, I);
      p.set(degree - k, k, -I);
      break;
  }
  return p;
}

Eigen::MatrixXd tm_matrix(int m) {
  if (m < 1) fail(ErrorKind::InvalidArgument, "tm_matrix needs m >= 1");
  const auto fb = real_homogeneous_basis(m + 2);
  const auto pb = real_homogeneous_basis(m + 1);
  const Eigen::Index cols = static_cast<Eigen::Index>(fb.size() + pb.size());
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(2 * m + 2, cols);
  for (Eigen::Index col = 0; col < cols; ++col) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(cols);
    e[col] = 1.0;
    std::vector<cplx> image(m + 1);
    const auto cf = homogeneous_coefficients(m + 2, fb, e, 0);
    const auto cp = homogeneous_coefficients(m + 1, pb, e, static_cast<Eigen::Index>(fb.size()));
    // D^2 z^k zbar^l = k(k-1) z^{k-2} zbar^l;  D z^k zbar^l = k z^{k-1} zbar^l.
    for (int k = 2; k <= m + 2; ++k) image[k - 2] += static_cast<double>(k * (k - 1)) * cf[k];
    for (int k = 1; k <= m + 1; ++k) image[k - 1] -= 2.0 * k * cp[k];
    for (int p = 0; p <= m; ++p) {
      t(2 * p, col) = image[p].real();
      t(2 * p + 1, col) = image[p].imag();
    }
  }
  return t;
}

RankReport tm_rank_report(int m, double relative_cutoff) {
  const Eigen::MatrixXd t = tm_matrix(m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(t);
  const auto& s = svd.singularValues();
  const double cutoff = relative_cutoff * (s.size() > 0 ? s[0] : 0.0);
  int rank = 0;
  for (Eigen::Index k = 0; k < s.size(); ++k)
    if (s[k] > cutoff) ++rank;
  return {rank, static_cast<int>(t.cols()) - rank};
}

double curved_hessian_residual(const PowerSeries2& f, const PowerSeries2& phi, const PowerSeries2& g, int order) {
  const PowerSeries2 df = wirtinger_d(f);
  const PowerSeries2 lhs = wirtinger_d(df) - 2.0 * (wirtinger_d(phi) * df);
  double worst = 0.0;
  for (int d = 0; d <= order - 2; ++d)
    for (int l = 0; l <= d; ++l) worst = std::max(worst, std::abs(lhs.coeff(d - l, l) - g.coeff(d - l, l)));
  return worst;
}

LoewnerSolution loewner_solve(const PowerSeries2& g, int order, const LoewnerNormalization& norm) {
  if (order < 2) fail(ErrorKind::InvalidArgument, "loewner_solve needs order >= 2");
  if (g.max_degree() < order - 2) fail(ErrorKind::InvalidArgument, "g must be truncated at degree >= order - 2");

  PowerSeries2 f(order, true);
  PowerSeries2 phi(order, true);
  f.set(1, 0, 1.0);
  f.set(0, 1, 1.0);

  // m = 0: D^2 f_2 = g_0.
  const cplx g0 = g.coeff(0, 0);
  f.set(2, 0, 0.5 * g0);
  f.set(0, 2, 0.5 * std::conj(g0));
  f.set(1, 1, value_or_zero(norm.f_diag, 1));

  double g_scale = 0.0;
  for (int d = 0; d <= order - 2; ++d)
    for (int l = 0; l <= d; ++l) g_scale = std::max(g_scale, std::abs(g.coeff(d - l, l)));

  for (int m = 1; m <= order - 2; ++m) {
    // RHS_m = g_m + 2 sum_{k=2}^{m} D phi_k D f_{m+2-k}: the degree-m part of
    // 2 (D phi)(D f_high) with everything of degree > m+1 in f still unset.
    PowerSeries2 f_high = f;
    f_high.set(1, 0, 0.0);
    f_high.set(0, 1, 0.0);
    const PowerSeries2 coupling = wirtinger_d(phi) * wirtinger_d(f_high);
    Eigen::VectorXd rhs(2 * m + 2);
    for (int p = 0; p <= m; ++p) {
      const cplx v = g.coeff(p, m - p) + 2.0 * coupling.coeff(p, m - p);
      rhs[2 * p] = v.real();
      rhs[2 * p + 1] = v.imag();
    }

    const auto fb = real_homogeneous_basis(m + 2);
    const auto pb = real_homogeneous_basis(m + 1);
    const Eigen::Index nf = static_cast<Eigen::Index>(fb.size());
    const Eigen::Index cols = nf + static_cast<Eigen::Index>(pb.size());

    std::vector<std::pair<Eigen::Index, double>> pins;
    if (norm.suppress_phi_harmonic) {
      pins.push_back({cols - 2, 0.0});
      pins.push_back({cols - 1, 0.0});
    }
    if (m % 2 == 0)
      pins.push_back({0, value_or_zero(norm.f_diag, (m + 2) / 2)});
    else
      pins.push_back({nf, value_or_zero(norm.phi_diag, (m + 1) / 2)});

    const Eigen::MatrixXd t = tm_matrix(m);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(t.rows() + static_cast<Eigen::Index>(pins.size()), cols);
    Eigen::VectorXd b(a.rows());
    a.topRows(t.rows()) = t;
    b.head(t.rows()) = rhs;
    for (std::size_t k = 0; k < pins.size(); ++k) {
      const Eigen::Index row = t.rows() + static_cast<Eigen::Index>(k);
      a(row, pins[k].first) = 1.0;
      b[row] = pins[k].second;
    }
    const Eigen::VectorXd x = a.completeOrthogonalDecomposition().solve(b);
    const double residual = (a * x - b).cwiseAbs().maxCoeff();
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if (!(residual <= kSolveTolerance * scale))
      fail(ErrorKind::SolveFailed, "curved Hessian recursion: degree " + std::to_string(m) + " residual " +
                                       std::to_string(residual / scale) + " exceeds tolerance");

    const auto cf = homogeneous_coefficients(m + 2, fb, x, 0);
    const auto cp = homogeneous_coefficients(m + 1, pb, x, nf);
    for (int k = 0; k <= m + 2; ++k) f.set(k, m + 2 - k, cf[k]);
    for (int k = 0; k <= m + 1; ++k) phi.set(k, m + 1 - k, cp[k]);
  }
  f.symmetrize();
  phi.symmetrize();

  LoewnerSolution sol{f, phi, order, 0.0, norm};
  sol.residual_norm = curved_hessian_residual(sol.f, sol.phi, g, order);
  if (!(sol.residual_norm <= kSolveTolerance * (1.0 + g_scale)))
    fail(ErrorKind::SolveFailed, "curved Hessian solution residual " + std::to_string(sol.residual_norm));
  return sol;
}

}  // namespace umbilic
