// SPDX-License-Identifier: Apache-2.0
//
// Primal active-set method for strictly convex inequality-constrained QPs
//
//   min  0.5 z'Hz + g'z   s.t.  A z <= b
//
// started from a feasible point. The working set begins empty and only ever
// gains constraints whose normal is not in the span of the current working
// rows, so the equality-constrained subproblems stay nonsingular even when the
// data contains duplicated or paired (+a, -a) rows.
#pragma once

#include "rssqp/types.hpp"

namespace rssqp {

struct InequalityQp {
  Matrix H;
  Vector g;
  Matrix A;
  Vector b;
};

struct ActiveSetOptions {
  int max_changes = 0;           // 0 picks 50 * (rows + cols)
  double activity_tol = 1e-9;    // minimal cosine between a_i and the step to block
  double step_tol = 1e-13;       // relative size of a null step
  double multiplier_tol = 1e-10; // negative multipliers above -tol are accepted
};

struct QpResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector z;
  Vector multipliers;  // one per row of A, zero off the final working set
  double objective = 0.0;
  int iterations = 0;
};

/// `start` must satisfy A start <= b up to round-off.
QpResult solve_inequality_qp(const InequalityQp& qp, const Vector& start,
                             const ActiveSetOptions& opts = {});

}  // namespace rssqp
