// SPDX-License-Identifier: Apache-2.0
//
// Subproblems of one SQP iteration.
//
// Distance LP: best l-infinity reduction of the linearized constraint
// violation inside the box ||p||_inf <= sigma_k,
//
//   min_{p, y}  y
//   s.t.  -y e <= h + grad_h' p <= y e
//               c + grad_c' p <= y e
//         ||p||_inf <= sigma_k,  y >= 0.
//
// Direction QP: model step restricted to the kappa_k-relaxed linearization
//
//   min_d  g'd + 0.5 d'Hd
//   s.t.  -kappa e <= h + grad_h' d <= kappa e
//               c + grad_c' d <= kappa e
//         ||d||_inf <= beta.
//
// The two-sided equality rows are kept as separate one-sided rows so both
// multiplier vectors (upper side, lower side) are reported.
#pragma once

#include <optional>

#include "rssqp/types.hpp"

namespace rssqp {

struct SubproblemSolution {
  Vector primal;  // (p, y) for the distance problems, d for the QP, t for the optimality LP
  double objective_value = 0.0;
  // Direction QP only.
  Vector eq_upper;  // rows  h + grad_h' d <= kappa
  Vector eq_lower;  // rows -h - grad_h' d <= kappa
  Vector ineq;      // rows  c + grad_c' d <= kappa
  Vector bounds;    // d_i <= beta (first n), -d_i <= beta (last n)
  double kkt_residual = 0.0;
  SolveStatus status = SolveStatus::NumericalFailure;
  int iterations = 0;
};

struct DistanceLpData {
  Vector h;
  Vector c;
  Matrix grad_h;  // n x m1
  Matrix grad_c;  // n x m2
  double sigma_k = 0.0;

  Eigen::Index n() const { return grad_h.rows() > 0 ? grad_h.rows() : grad_c.rows(); }
};

struct DirectionQpData {
  Vector g;
  Matrix H;
  Vector h;
  Vector c;
  Matrix grad_h;
  Matrix grad_c;
  double kappa_k = 0.0;
  double beta_k = 0.0;
};

inline constexpr double kDefaultRegularization = 1e-8;

/// Bounded simplex on the distance LP. sigma_k == 0 short-circuits to p = 0, y = phi.
SubproblemSolution solve_distance_lp(const DistanceLpData& data);

/// Minimizes y + zeta_r/2 (||p||^2 + y^2) over the distance-LP feasible set.
SubproblemSolution solve_regularized_distance_qp(const DistanceLpData& data,
                                                 double zeta_r = kDefaultRegularization);

/// Active-set solve started from `start` when it is feasible, else from a
/// point found by a phase-one LP.
SubproblemSolution solve_direction_qp(const DirectionQpData& data,
                                      const std::optional<Vector>& start = std::nullopt);

/// min g't  s.t. grad_h' t = 0, grad_c' t <= 0, ||t||_inf <= beta_l / 2.
/// The optimal value is <= 0; its negation is the optimality measure chi.
SubproblemSolution solve_optimality_lp(const Vector& g, const Matrix& grad_h, const Matrix& grad_c,
                                       double beta_l);

/// Exact direction-QP optimum by enumerating every linearly independent
/// active set of at most n rows. Throws InvalidArgument when n + m1 + m2 > 12.
SubproblemSolution brute_force_qp_oracle(const DirectionQpData& data);

/// Largest violation of the direction-QP rows (linearized rows against kappa,
/// box against beta); nonpositive means feasible.
double direction_qp_violation(const DirectionQpData& data, const Vector& d);

/// Objective g'd + 0.5 d'Hd.
double direction_qp_objective(const DirectionQpData& data, const Vector& d);

}  // namespace rssqp
