// SPDX-License-Identifier: Apache-2.0
#include "rssqp/hessian.hpp"

#include <cmath>

namespace rssqp {

const char* to_string(HessianPolicy p) {
  return p == HessianPolicy::Identity ? "identity" : "damped-secant";
}

Matrix clip_spectrum(const Matrix& H, double lo, double hi) {
  const Matrix sym = 0.5 * (H + H.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) return Matrix::Identity(H.rows(), H.cols());
  const Vector lam = eig.eigenvalues().cwiseMax(lo).cwiseMin(hi);
  Matrix out = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

Matrix damped_secant_update(const Matrix& H, const Vector& s, const Vector& y, double xi,
                            double M_H) {
  const auto n = H.rows();
  if (!(s.norm() > 1e-14) || !y.allFinite()) return H;
  const Vector Hs = H * s;
  const double sHs = s.dot(Hs);
  const double sy = s.dot(y);
  if (!(sHs > 0.0)) return Matrix::Identity(n, n);
  const double damp = sy >= 0.2 * sHs ? 1.0 : 0.8 * sHs / (sHs - sy);
  const Vector r = damp * y + (1.0 - damp) * Hs;
  const double sr = s.dot(r);
  Matrix next = H - (Hs * Hs.transpose()) / sHs + (r * r.transpose()) / sr;
  if (!next.allFinite()) return Matrix::Identity(n, n);
  next = clip_spectrum(next, 2.0 * xi, M_H);
  if (!next.allFinite()) return Matrix::Identity(n, n);
  return next;
}

}  // namespace rssqp
