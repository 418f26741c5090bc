// SPDX-License-Identifier: Apache-2.0
//
// Dense bounded-variable primal simplex.
//
//   min  c'x
//   s.t. A_i x <= b_i  or  A_i x = b_i   (per row)
//        lower <= x <= upper             (entries may be infinite)
//
// Two phases with artificial variables, Bland's rule for both the entering and
// the leaving choice, so the pivot sequence is a deterministic function of the
// input. Intended for the small dense programs that arise inside SQP.
#pragma once

#include <vector>

#include "rssqp/types.hpp"

namespace rssqp {

enum class RowSense { LessEqual, Equal };

struct LinearProgram {
  Vector cost;
  Matrix A;
  Vector b;
  std::vector<RowSense> sense;
  Vector lower;
  Vector upper;
};

struct SimplexOptions {
  int max_iterations = 0;  // 0 picks a size-based default
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-11;
  double pivot_tol = 1e-11;
};

struct LpResult {
  SolveStatus status = SolveStatus::NumericalFailure;
  Vector x;
  double objective = 0.0;
  int iterations = 0;
};

LpResult solve_lp(const LinearProgram& lp, const SimplexOptions& opts = {});

}  // namespace rssqp
