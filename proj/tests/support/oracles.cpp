// SPDX-License-Identifier: Apache-2.0
#include "oracles.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <vector>

namespace rssqp::test {

namespace {

// Visits every k-subset of {0, ..., m-1} in lexicographic order.
template <class F>
void for_each_subset(int m, int k, F&& visit) {
  if (k > m) return;
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == m - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

VertexLpResult vertex_enumeration_lp(const Vector& c, const Matrix& G, const Vector& h,
                                     double feas_tol) {
  const int n = static_cast<int>(c.size());
  const int m = static_cast<int>(G.rows());
  VertexLpResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for_each_subset(m, n, [&](const std::vector<int>& rows) {
    Matrix A(n, n);
    Vector b(n);
    for (int i = 0; i < n; ++i) {
      A.row(i) = G.row(rows[i]);
      b[i] = h[rows[i]];
    }
    Eigen::FullPivLU<Matrix> lu(A);
    if (lu.rank() < n) return;
    const Vector z = lu.solve(b);
    const Vector slack = G * z - h;
    for (int i = 0; i < m; ++i) {
      if (slack[i] > feas_tol * (1.0 + std::abs(h[i]))) return;
    }
    const double obj = c.dot(z);
    if (obj < best.objective) {
      best.objective = obj;
      best.z = z;
      best.feasible = true;
    }
  });
  return best;
}

VertexLpResult distance_lp_oracle(const DistanceLpData& data) {
  const Eigen::Index n = data.n();
  const Eigen::Index m1 = data.h.size();
  const Eigen::Index m2 = data.c.size();
  const Eigen::Index rows = 2 * m1 + m2 + 2 * n + 1;
  Matrix G = Matrix::Zero(rows, n + 1);
  Vector h = Vector::Zero(rows);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < m1; ++i, r += 2) {
    G.row(r).head(n) = data.grad_h.col(i).transpose();
    G(r, n) = -1.0;
    h[r] = -data.h[i];
    G.row(r + 1).head(n) = -data.grad_h.col(i).transpose();
    G(r + 1, n) = -1.0;
    h[r + 1] = data.h[i];
  }
  for (Eigen::Index i = 0; i < m2; ++i, ++r) {
    G.row(r).head(n) = data.grad_c.col(i).transpose();
    G(r, n) = -1.0;
    h[r] = -data.c[i];
  }
  for (Eigen::Index i = 0; i < n; ++i, r += 2) {
    G(r, i) = 1.0;
    h[r] = data.sigma_k;
    G(r + 1, i) = -1.0;
    h[r + 1] = data.sigma_k;
  }
  G(r, n) = -1.0;
  Vector c = Vector::Zero(n + 1);
  c[n] = 1.0;
  return vertex_enumeration_lp(c, G, h);
}

VertexLpResult optimality_lp_oracle(const Vector& g, const Matrix& grad_h, const Matrix& grad_c,
                                    double beta_l) {
  const Eigen::Index n = g.size();
  const Eigen::Index m1 = grad_h.cols();
  const Eigen::Index m2 = grad_c.cols();
  Matrix G = Matrix::Zero(2 * m1 + m2 + 2 * n, n);
  Vector h = Vector::Zero(G.rows());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < m1; ++i, r += 2) {
    G.row(r) = grad_h.col(i).transpose();
    G.row(r + 1) = -grad_h.col(i).transpose();
  }
  for (Eigen::Index i = 0; i < m2; ++i, ++r) G.row(r) = grad_c.col(i).transpose();
  for (Eigen::Index i = 0; i < n; ++i, r += 2) {
    G(r, i) = 1.0;
    h[r] = 0.5 * beta_l;
    G(r + 1, i) = -1.0;
    h[r + 1] = 0.5 * beta_l;
  }
  return vertex_enumeration_lp(g, G, h);
}

Matrix fd_gradient(const std::function<Vector(const Vector&)>& f, const Vector& x, double step) {
  const Vector f0 = f(x);
  Matrix J(x.size(), f0.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double hi = step * (1.0 + std::abs(x[i]));
    Vector xp = x, xm = x;
    xp[i] += hi;
    xm[i] -= hi;
    J.row(i) = ((f(xp) - f(xm)) / (2.0 * hi)).transpose();
  }
  return J;
}

double direction_qp_stationarity(const DirectionQpData& data, const SubproblemSolution& sol) {
  const Eigen::Index n = data.g.size();
  Vector r = data.g + data.H * sol.primal;
  if (data.h.size() > 0) r += data.grad_h * (sol.eq_upper - sol.eq_lower);
  if (data.c.size() > 0) r += data.grad_c * sol.ineq;
  r += sol.bounds.head(n) - sol.bounds.tail(n);
  return r.lpNorm<Eigen::Infinity>();
}

}  // namespace rssqp::test
