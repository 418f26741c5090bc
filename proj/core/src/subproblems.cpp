// SPDX-License-Identifier: Apache-2.0
#include "rssqp/subproblems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "rssqp/active_set_qp.hpp"
#include "rssqp/problem.hpp"
#include "rssqp/simplex.hpp"

namespace rssqp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_distance_data(const DistanceLpData& d) {
  const auto n = d.n();
  if (d.grad_h.rows() != n || d.grad_c.rows() != n || d.grad_h.cols() != d.h.size() ||
      d.grad_c.cols() != d.c.size()) {
    throw InvalidArgument("distance subproblem: inconsistent dimensions");
  }
  if (!(d.sigma_k >= 0.0)) throw InvalidArgument("distance subproblem: sigma_k must be >= 0");
}

// Rows of the distance problem over z = (p, y): G z <= r.
void distance_rows(const DistanceLpData& d, Matrix& G, Vector& r) {
  const auto n = d.n();
  const auto m1 = d.h.size();
  const auto m2 = d.c.size();
  G = Matrix::Zero(2 * m1 + m2, n + 1);
  r.resize(2 * m1 + m2);
  for (Eigen::Index i = 0; i < m1; ++i) {
    G.row(i).head(n) = d.grad_h.col(i).transpose();
    G(i, n) = -1.0;
    r[i] = -d.h[i];
    G.row(m1 + i).head(n) = -d.grad_h.col(i).transpose();
    G(m1 + i, n) = -1.0;
    r[m1 + i] = d.h[i];
  }
  for (Eigen::Index j = 0; j < m2; ++j) {
    G.row(2 * m1 + j).head(n) = d.grad_c.col(j).transpose();
    G(2 * m1 + j, n) = -1.0;
    r[2 * m1 + j] = -d.c[j];
  }
}

SubproblemSolution trivial_distance(const DistanceLpData& d) {
  SubproblemSolution sol;
  sol.primal = Vector::Zero(d.n() + 1);
  sol.primal[d.n()] = infeasibility(d.h, d.c);
  sol.objective_value = sol.primal[d.n()];
  sol.status = SolveStatus::Optimal;
  return sol;
}

// Direction-QP rows A d <= b in the documented order:
// eq upper (m1), eq lower (m1), ineq (m2), box upper (n), box lower (n).
void direction_rows(const DirectionQpData& d, Matrix& A, Vector& b) {
  const auto n = d.g.size();
  const auto m1 = d.h.size();
  const auto m2 = d.c.size();
  A = Matrix::Zero(2 * m1 + m2 + 2 * n, n);
  b.resize(A.rows());
  for (Eigen::Index i = 0; i < m1; ++i) {
    A.row(i) = d.grad_h.col(i).transpose();
    b[i] = d.kappa_k - d.h[i];
    A.row(m1 + i) = -d.grad_h.col(i).transpose();
    b[m1 + i] = d.kappa_k + d.h[i];
  }
  for (Eigen::Index j = 0; j < m2; ++j) {
    A.row(2 * m1 + j) = d.grad_c.col(j).transpose();
    b[2 * m1 + j] = d.kappa_k - d.c[j];
  }
  const auto off = 2 * m1 + m2;
  for (Eigen::Index i = 0; i < n; ++i) {
    A(off + i, i) = 1.0;
    b[off + i] = d.beta_k;
    A(off + n + i, i) = -1.0;
    b[off + n + i] = d.beta_k;
  }
}

void check_direction_data(const DirectionQpData& d) {
  const auto n = d.g.size();
  if (n == 0 || d.H.rows() != n || d.H.cols() != n || d.grad_h.rows() != n ||
      d.grad_c.rows() != n || d.grad_h.cols() != d.h.size() || d.grad_c.cols() != d.c.size()) {
    throw InvalidArgument("direction QP: inconsistent dimensions");
  }
  if (!(d.kappa_k >= 0.0) || !(d.beta_k >= 0.0)) {
    throw InvalidArgument("direction QP: kappa_k and beta_k must be >= 0");
  }
}

// Splits a row-multiplier vector into the named blocks and computes the KKT residual.
void fill_multipliers(const DirectionQpData& d, const Matrix& A, const Vector& b,
                      const Vector& mult, SubproblemSolution& sol) {
  const auto n = d.g.size();
  const auto m1 = d.h.size();
  const auto m2 = d.c.size();
  sol.eq_upper = mult.segment(0, m1);
  sol.eq_lower = mult.segment(m1, m1);
  sol.ineq = mult.segment(2 * m1, m2);
  sol.bounds = mult.segment(2 * m1 + m2, 2 * n);
  const Vector& x = sol.primal;
  const Vector stat = d.g + d.H * x + A.transpose() * mult;
  double r = stat.cwiseAbs().maxCoeff();
  const Vector slack = b - A * x;
  for (Eigen::Index i = 0; i < mult.size(); ++i) {
    r = std::max(r, std::abs(mult[i] * slack[i]));
    r = std::max(r, -mult[i]);
    r = std::max(r, -slack[i]);
  }
  sol.kkt_residual = r;
}

}  // namespace

SubproblemSolution solve_distance_lp(const DistanceLpData& data) {
  check_distance_data(data);
  const double phi = infeasibility(data.h, data.c);
  if (data.sigma_k == 0.0 || phi == 0.0) return trivial_distance(data);
  const auto n = data.n();

  // Solved in the scaled variables q = p / sigma_k, t = y / phi, rows normalized.
  // q = q+ - q- with q+, q- in [0, 1], so components the optimum does not need stay at zero.
  Matrix G;
  Vector r;
  distance_rows(data, G, r);
  G.leftCols(n) *= data.sigma_k / phi;
  r /= phi;
  for (Eigen::Index i = 0; i < G.rows(); ++i) {
    const double s = G.row(i).cwiseAbs().maxCoeff();
    G.row(i) /= s;
    r[i] /= s;
  }
  LinearProgram lp;
  lp.A.resize(G.rows(), 2 * n + 1);
  lp.A << G.leftCols(n), -G.leftCols(n), G.col(n);
  lp.b = r;
  lp.sense.assign(lp.b.size(), RowSense::LessEqual);
  lp.cost = Vector::Zero(2 * n + 1);
  lp.cost[2 * n] = 1.0;
  lp.lower = Vector::Zero(2 * n + 1);
  lp.upper = Vector::Constant(2 * n + 1, 1.0);
  lp.upper[2 * n] = kInf;

  const LpResult res = solve_lp(lp);
  SubproblemSolution sol;
  sol.iterations = res.iterations;
  if (res.status != SolveStatus::Optimal) {
    // The program is feasible and bounded by construction; anything else is a breakdown.
    sol.status = SolveStatus::NumericalFailure;
    return sol;
  }
  sol.primal.resize(n + 1);
  sol.primal.head(n) = data.sigma_k * (res.x.head(n) - res.x.segment(n, n));
  // The optimal y is the linearized distance at p; recomputing it removes round-off.
  const Vector p = sol.primal.head(n);
  Vector lh = data.h;
  Vector lc = data.c;
  if (lh.size() > 0) lh += data.grad_h.transpose() * p;
  if (lc.size() > 0) lc += data.grad_c.transpose() * p;
  sol.primal[n] = std::max(0.0, infeasibility(lh, lc));
  sol.objective_value = sol.primal[n];
  sol.status = SolveStatus::Optimal;
  return sol;
}

SubproblemSolution solve_regularized_distance_qp(const DistanceLpData& data, double zeta_r) {
  check_distance_data(data);
  if (!(zeta_r > 0.0)) throw InvalidArgument("regularized distance QP: zeta_r must be > 0");
  if (data.sigma_k == 0.0) return trivial_distance(data);
  const auto n = data.n();

  Matrix G;
  Vector r;
  distance_rows(data, G, r);
  InequalityQp qp;
  qp.H = zeta_r * Matrix::Identity(n + 1, n + 1);
  qp.g = Vector::Zero(n + 1);
  qp.g[n] = 1.0;
  qp.A = Matrix::Zero(G.rows() + 2 * n + 1, n + 1);
  qp.b.resize(qp.A.rows());
  qp.A.topRows(G.rows()) = G;
  qp.b.head(G.rows()) = r;
  for (Eigen::Index i = 0; i < n; ++i) {
    qp.A(G.rows() + i, i) = 1.0;
    qp.b[G.rows() + i] = data.sigma_k;
    qp.A(G.rows() + n + i, i) = -1.0;
    qp.b[G.rows() + n + i] = data.sigma_k;
  }
  qp.A(G.rows() + 2 * n, n) = -1.0;
  qp.b[G.rows() + 2 * n] = 0.0;

  Vector start = Vector::Zero(n + 1);
  start[n] = infeasibility(data.h, data.c);
  const QpResult res = solve_inequality_qp(qp, start);
  SubproblemSolution sol;
  sol.iterations = res.iterations;
  sol.status = res.status == SolveStatus::Optimal ? SolveStatus::Optimal : SolveStatus::NumericalFailure;
  if (sol.status != SolveStatus::Optimal) return sol;
  sol.primal = res.z;
  sol.primal[n] = std::max(0.0, sol.primal[n]);
  sol.objective_value = sol.primal[n];
  return sol;
}

double direction_qp_violation(const DirectionQpData& data, const Vector& d) {
  Matrix A;
  Vector b;
  direction_rows(data, A, b);
  if (A.rows() == 0) return -kInf;
  return (A * d - b).maxCoeff();
}

double direction_qp_objective(const DirectionQpData& data, const Vector& d) {
  return data.g.dot(d) + 0.5 * d.dot(data.H * d);
}

SubproblemSolution solve_direction_qp(const DirectionQpData& data, const std::optional<Vector>& start) {
  check_direction_data(data);
  const auto n = data.g.size();
  Matrix A;
  Vector b;
  direction_rows(data, A, b);

  SubproblemSolution sol;
  Vector x0;
  const double scale = 1.0 + (b.size() > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
  if (start && start->size() == n && (A * *start - b).maxCoeff() <= 1e-9 * scale) {
    x0 = *start;
  } else {
    LinearProgram lp;
    lp.A = A;
    lp.b = b;
    lp.sense.assign(b.size(), RowSense::LessEqual);
    lp.cost = Vector::Zero(n);
    lp.lower = Vector::Constant(n, -kInf);
    lp.upper = Vector::Constant(n, kInf);
    const LpResult feas = solve_lp(lp);
    if (feas.status == SolveStatus::Infeasible) {
      sol.status = SolveStatus::Infeasible;
      return sol;
    }
    if (feas.status != SolveStatus::Optimal) {
      sol.status = SolveStatus::NumericalFailure;
      return sol;
    }
    x0 = feas.x;
  }

  InequalityQp qp{data.H, data.g, A, b};
  ActiveSetOptions opts;
  opts.max_changes = 50 * static_cast<int>(n + data.h.size() + data.c.size());
  const QpResult res = solve_inequality_qp(qp, x0, opts);
  sol.iterations = res.iterations;
  sol.status = res.status;
  if (res.status != SolveStatus::Optimal) return sol;
  sol.primal = res.z;
  sol.objective_value = res.objective;
  fill_multipliers(data, A, b, res.multipliers, sol);
  return sol;
}

SubproblemSolution solve_optimality_lp(const Vector& g, const Matrix& grad_h, const Matrix& grad_c,
                                       double beta_l) {
  const auto n = g.size();
  if (grad_h.rows() != n || grad_c.rows() != n) {
    throw InvalidArgument("optimality LP: inconsistent dimensions");
  }
  if (!(beta_l > 0.0)) throw InvalidArgument("optimality LP: beta_l must be > 0");
  const auto m1 = grad_h.cols();
  const auto m2 = grad_c.cols();
  LinearProgram lp;
  lp.cost = g;
  lp.A.resize(m1 + m2, n);
  if (m1 > 0) lp.A.topRows(m1) = grad_h.transpose();
  if (m2 > 0) lp.A.bottomRows(m2) = grad_c.transpose();
  lp.b = Vector::Zero(m1 + m2);
  lp.sense.assign(m1, RowSense::Equal);
  lp.sense.insert(lp.sense.end(), m2, RowSense::LessEqual);
  lp.lower = Vector::Constant(n, -0.5 * beta_l);
  lp.upper = Vector::Constant(n, 0.5 * beta_l);

  const LpResult res = solve_lp(lp);
  SubproblemSolution sol;
  sol.iterations = res.iterations;
  if (res.status != SolveStatus::Optimal) {
    sol.status = SolveStatus::NumericalFailure;
    return sol;
  }
  sol.primal = res.x;
  sol.objective_value = std::min(0.0, res.objective);
  sol.status = SolveStatus::Optimal;
  return sol;
}

SubproblemSolution brute_force_qp_oracle(const DirectionQpData& data) {
  check_direction_data(data);
  const auto n = data.g.size();
  if (n + data.h.size() + data.c.size() > 12) {
    throw InvalidArgument("brute_force_qp_oracle: instance too large (n + m1 + m2 > 12)");
  }
  Matrix A;
  Vector b;
  direction_rows(data, A, b);
  const int rows = static_cast<int>(A.rows());
  const double feas_tol = 1e-9 * (1.0 + b.cwiseAbs().maxCoeff());

  SubproblemSolution best;
  best.status = SolveStatus::Infeasible;
  double best_obj = kInf;
  Vector best_mult;

  // Subsets in lexicographic order of their sorted index lists.
  std::vector<int> subset;
  auto consider = [&](const std::vector<int>& s) {
    const auto k = static_cast<Eigen::Index>(s.size());
    Matrix K = Matrix::Zero(n + k, n + k);
    K.topLeftCorner(n, n) = data.H;
    Vector rhs = Vector::Zero(n + k);
    rhs.head(n) = -data.g;
    for (Eigen::Index i = 0; i < k; ++i) {
      K.block(n + i, 0, 1, n) = A.row(s[i]);
      K.block(0, n + i, n, 1) = A.row(s[i]).transpose();
      rhs[n + i] = b[s[i]];
    }
    Eigen::FullPivLU<Matrix> lu(K);
    if (!lu.isInvertible()) return;
    const Vector sol = lu.solve(rhs);
    const Vector x = sol.head(n);
    if ((A * x - b).maxCoeff() > feas_tol) return;
    const double obj = direction_qp_objective(data, x);
    if (!std::isfinite(best_obj) || obj < best_obj - 1e-13 * (1.0 + std::abs(best_obj))) {
      best_obj = obj;
      best.primal = x;
      best_mult = Vector::Zero(rows);
      for (Eigen::Index i = 0; i < k; ++i) best_mult[s[i]] = sol[n + i];
    }
  };
  // Recursive lexicographic enumeration, bounded by n active rows.
  auto recurse = [&](auto&& self, int next) -> void {
    consider(subset);
    if (static_cast<Eigen::Index>(subset.size()) == n) return;
    for (int i = next; i < rows; ++i) {
      subset.push_back(i);
      self(self, i + 1);
      subset.pop_back();
    }
  };
  recurse(recurse, 0);

  if (!std::isfinite(best_obj)) return best;
  best.status = SolveStatus::Optimal;
  best.objective_value = best_obj;
  fill_multipliers(data, A, b, best_mult, best);
  return best;
}

}  // namespace rssqp
