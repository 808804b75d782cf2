#pragma once

// Independent reference computations used by the tests. None of these go
// through the LMI lowering or the conic solver.

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "sparseobs/model.hpp"

namespace testing {

using sparseobs::Matrix;
using sparseobs::Vector;

// Stabilising solution of Ã P + P Ãᵀ − P G P + Q̃ = 0 from the stable
// invariant subspace of [Ãᵀ −G; −Q̃ −Ã], polished by Newton steps.
inline Matrix filter_riccati(const Matrix& at, const Matrix& g, const Matrix& qt) {
  const auto n = at.rows();
  Matrix h(2 * n, 2 * n);
  h << at.transpose(), -g, -qt, -at;
  Eigen::ComplexEigenSolver<Matrix> es(h);
  Eigen::MatrixXcd basis(2 * n, n);
  int k = 0;
  for (Eigen::Index i = 0; i < 2 * n && k < n; ++i) {
    if (es.eigenvalues()(i).real() < 0.0) basis.col(k++) = es.eigenvectors().col(i);
  }
  Matrix p = (basis.bottomRows(n) * basis.topRows(n).inverse()).real();
  p = (0.5 * (p + p.transpose())).eval();
  for (int it = 0; it < 3; ++it) {
    const Matrix acl = at - p * g;
    p = sparseobs::linalg::solve_lyapunov(acl, p * g * p + qt);
  }
  return p;
}

// Least achievable H2 norm of the observer error over all gains L for fixed
// precisions: the steady-state Kalman filter with correlated noise. Sensors
// with κ² = 0 are dropped.
inline double kalman_h2(const sparseobs::LtiPlant& p, const Vector& kappa_sq) {
  std::vector<int> s;
  for (int i = 0; i < kappa_sq.size(); ++i) {
    if (kappa_sq(i) > 0.0) s.push_back(i);
  }
  const sparseobs::LtiPlant q = sparseobs::restrict_sensors(p, s);
  const auto ny = static_cast<Eigen::Index>(s.size());
  Vector sn(ny);
  for (Eigen::Index i = 0; i < ny; ++i) sn(i) = 1.0 / std::sqrt(kappa_sq(s[i]));
  const Matrix bw = sparseobs::linalg::hstack(q.B_d * q.S_d, Matrix::Zero(q.nx(), ny));
  const Matrix dw = sparseobs::linalg::hstack(q.D_d * q.S_d, Matrix(sn.asDiagonal()));
  const Matrix qn = bw * bw.transpose();
  const Matrix rn = dw * dw.transpose();
  const Matrix nn = bw * dw.transpose();
  const Matrix ri = rn.inverse();
  const Matrix at = q.A - nn * ri * q.C_y;
  const Matrix g = q.C_y.transpose() * ri * q.C_y;
  const Matrix qt = qn - nn * ri * nn.transpose();
  const Matrix pp = filter_riccati(at, g, qt);
  return std::sqrt((q.C_z * pp * q.C_z.transpose()).trace());
}

// Least κ² for a single sensor `i` meeting kalman_h2 ≤ γ, by bisection on a
// log scale; +inf when even κ² = hi does not reach γ (the Riccati solve loses accuracy
// much beyond 1e10 on stiff plants).
inline double min_single_sensor_precision(const sparseobs::LtiPlant& p, int i, double gamma, double hi = 1e10) {
  Vector k = Vector::Zero(p.ny());
  k(i) = hi;
  if (kalman_h2(p, k) > gamma) return INFINITY;
  double lo = 1e-12;
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-10; ++it) {
    const double mid = std::sqrt(lo * hi);
    k(i) = mid;
    (kalman_h2(p, k) <= gamma ? hi : lo) = mid;
  }
  return hi;
}

}  // namespace testing
