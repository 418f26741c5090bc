// SPDX-License-Identifier: Apache-2.0
#include "rssqp/active_set_qp.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace rssqp {

namespace {

// Minimizes 0.5 p'Hp + grad'p subject to W p = 0 for the working rows W, via the
// null space of a QR factorization of W'. Multipliers satisfy H p + grad + W' lam = 0.
bool solve_eqp(const Matrix& H, const Matrix& A, const std::vector<int>& work, const Vector& grad,
               Vector& p, Vector& lam) {
  const auto n = H.rows();
  const auto k = static_cast<Eigen::Index>(work.size());
  if (k == 0) {
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() != Eigen::Success) return false;
    p = llt.solve(-grad);
    lam.resize(0);
    return p.allFinite();
  }
  if (k > n) return false;
  Matrix Wt(n, k);
  for (Eigen::Index i = 0; i < k; ++i) Wt.col(i) = A.row(work[i]).transpose();
  Eigen::HouseholderQR<Matrix> qr(Wt);
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  const double rscale = R.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(std::abs(R(i, i)) > 1e-13 * rscale)) return false;
  }
  if (k < n) {
    const Matrix Z = Q.rightCols(n - k);
    const Matrix reduced = Z.transpose() * H * Z;
    Eigen::LLT<Matrix> llt(reduced);
    if (llt.info() != Eigen::Success) return false;
    p = -Z * llt.solve(Z.transpose() * grad);
  } else {
    p = Vector::Zero(n);
  }
  const Vector r = -(grad + H * p);
  lam = R.triangularView<Eigen::Upper>().solve(Q.leftCols(k).transpose() * r);
  return p.allFinite() && lam.allFinite();
}

}  // namespace

QpResult solve_inequality_qp(const InequalityQp& qp, const Vector& start,
                             const ActiveSetOptions& opts) {
  const auto n = qp.H.rows();
  const auto rows = qp.A.rows();
  if (qp.H.cols() != n || qp.g.size() != n || start.size() != n || qp.b.size() != rows ||
      (rows > 0 && qp.A.cols() != n)) {
    throw InvalidArgument("solve_inequality_qp: inconsistent dimensions");
  }
  const int max_changes =
      opts.max_changes > 0 ? opts.max_changes : 50 * static_cast<int>(rows + n);

  QpResult res;
  res.z = start;
  res.multipliers = Vector::Zero(rows);
  std::vector<int> work;
  std::vector<char> in_work(rows, 0);
  Vector row_norm(rows);
  for (Eigen::Index i = 0; i < rows; ++i) row_norm[i] = qp.A.row(i).norm();

  Vector p, lam;
  bool full_step = false;
  while (true) {
    const Vector grad = qp.g + qp.H * res.z;
    if (!solve_eqp(qp.H, qp.A, work, grad, p, lam)) {
      res.status = SolveStatus::NumericalFailure;
      return res;
    }
    const double pnorm = p.size() > 0 ? p.cwiseAbs().maxCoeff() : 0.0;
    const double znorm = res.z.size() > 0 ? res.z.cwiseAbs().maxCoeff() : 0.0;
    const double gnorm = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
    // After an unblocked full step z is the working-set minimizer, and n working
    // rows pin z; either way any residual p is round-off.
    const bool pinned = static_cast<Eigen::Index>(work.size()) >= n;
    if (full_step || pinned || pnorm <= opts.step_tol * (1.0 + znorm + gnorm)) {
      full_step = false;
      // Stationary on the working set: drop the most negative multiplier, lowest row on ties.
      int drop = -1;
      double most_negative = -opts.multiplier_tol * (1.0 + grad.cwiseAbs().maxCoeff());
      for (std::size_t i = 0; i < work.size(); ++i) {
        if (lam[i] < most_negative ||
            (drop >= 0 && lam[i] == most_negative && work[i] < work[drop])) {
          most_negative = lam[i];
          drop = static_cast<int>(i);
        }
      }
      if (drop < 0) {
        for (std::size_t i = 0; i < work.size(); ++i) res.multipliers[work[i]] = lam[i];
        res.objective = 0.5 * res.z.dot(qp.H * res.z) + qp.g.dot(res.z);
        res.status = SolveStatus::Optimal;
        return res;
      }
      if (res.iterations >= max_changes) {
        res.status = SolveStatus::MaxIterations;
        return res;
      }
      in_work[work[drop]] = 0;
      work.erase(work.begin() + drop);
      ++res.iterations;
      continue;
    }

    double alpha = 1.0;
    int block = -1;
    const double p2 = p.norm();
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (in_work[i]) continue;
      const double ap = qp.A.row(i).dot(p);
      if (ap <= opts.activity_tol * row_norm[i] * p2) continue;
      const double slack = std::max(0.0, qp.b[i] - qp.A.row(i).dot(res.z));
      const double ratio = slack / ap;
      if (ratio < alpha) {
        alpha = ratio;
        block = static_cast<int>(i);
      }
    }
    res.z += alpha * p;
    full_step = block < 0;
    if (block >= 0) {
      if (res.iterations >= max_changes) {
        res.status = SolveStatus::MaxIterations;
        return res;
      }
      work.push_back(block);
      in_work[block] = 1;
      ++res.iterations;
    }
  }
}

}  // namespace rssqp
