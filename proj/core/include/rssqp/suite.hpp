// SPDX-License-Identifier: Apache-2.0
//
// Adapted Hock-Schittkowski / Schittkowski test problems.
//
// Every source problem has an objective of the form sum_i a_i F_i(x)^2 (plus a
// constant), which becomes E[sum_i a_i (F_i(x) + xi_i)^2] with xi_i ~ N(0, sigma^2).
// Constraint sets are completed so each instance carries both kinds:
//
//  * equality-only sources gain  c_new(x) = h_last(x - e) - b <= 0 with
//    b = h_last(x* - e), active at the first listed solution x*;
//  * inequality-only sources gain h_new(x) = c_i(x - e) - c_i(x* - e) = 0, with
//    c_i the last nonlinear constraint active at x* (falling back to a
//    vertical shift of the last nonlinear, then last, inequality);
//  * sources with both kinds are used unchanged.
//
// Simple bounds are listed as linear inequalities after the general constraints.
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rssqp/problem.hpp"

namespace rssqp {

enum class Adaptation { AddedInequality, SynthesizedEquality, None };

const char* to_string(Adaptation a);

struct AdaptedProblemSpec {
  std::string source_id;
  Adaptation adaptation = Adaptation::None;
  double sigma = 0.0;
  double derived_constant = 0.0;  // b for an added inequality, the vertical shift otherwise
  int shifted_constraint = -1;    // index in the source's h (or c) that was shifted
  bool horizontal_shift = true;
  int n = 0;
  int m1 = 0;  // after adaptation
  int m2 = 0;
  double optimal_value = 0.0;  // source collection value at x*
  std::string provenance;
};

/// Ids of the implemented subset, in manifest order.
std::vector<std::string> list_suite();

/// Throws InvalidArgument naming the available ids for an unknown id.
ProblemInstance build_adapted_problem(const std::string& source_id, double sigma);

AdaptedProblemSpec adapted_problem_spec(const std::string& source_id, double sigma = 0.0);

struct SolutionDistance {
  double dist = 0.0;
  double log10_dist = 0.0;
};

inline constexpr double kDistanceFloor = 1e-18;

/// Euclidean distance to the nearest listed solution; nullopt for an empty set.
std::optional<SolutionDistance> distance_to_solution_set(const Vector& x,
                                                         const std::vector<Vector>& sols);

/// Problems not expected to reach dist <= 1e-4 deterministically within 2000 iterations.
std::vector<std::string> hard_cases();

/// Deterministic JSON manifest of the suite (ids, sizes, adaptations, constants, solutions).
std::string suite_manifest_json();

}  // namespace rssqp
