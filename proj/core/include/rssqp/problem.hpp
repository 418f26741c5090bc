// SPDX-License-Identifier: Apache-2.0
//
// Constrained problems with a stochastic sum-of-squares objective
//
//   min  f(x) = c0 + E[ sum_i a_i (F_i(x) + xi_i)^2 ],   xi_i ~ N(0, sigma^2)
//   s.t. h(x)  = 0
//        c(x) <= 0
//
// Constraint values and Jacobians are deterministic and exact. Jacobians are
// stored gradient-per-column, i.e. grad_h is n x m1 and grad_c is n x m2.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rssqp/types.hpp"

namespace rssqp {

/// A vector-valued map with its transposed Jacobian (n x m, one gradient per column).
struct VectorFunction {
  std::function<Vector(const Vector&)> value;
  std::function<Matrix(const Vector&)> gradient;
};

struct ProblemInstance {
  std::string name;
  int n = 0;
  int m1 = 0;
  int m2 = 0;
  VectorFunction eq;    // h: R^n -> R^m1
  VectorFunction ineq;  // c: R^n -> R^m2

  // F(x, xi) = sum_i weights_i (F_i(x) + xi_i)^2, with F given by `components`.
  Vector weights;
  VectorFunction components;
  // Deterministic constant added to the objective; carries source offsets
  // such as the -25 in HS11 so optimal values line up with the collection.
  double objective_constant = 0.0;
  double sigma = 0.0;

  Vector x0;
  std::vector<Vector> solutions;

  int num_components() const { return static_cast<int>(weights.size()); }

  /// Throws InvalidArgument when any stored dimension disagrees with n, m1, m2.
  void validate() const;
};

struct EvalPoint {
  Vector x;
  Vector h_val;
  Vector c_val;
  Matrix grad_h;
  Matrix grad_c;
  double phi = 0.0;
};

/// l-infinity distance of (h, c) to {0}^m1 x R_-^m2.
double infeasibility(const Vector& h, const Vector& c);

EvalPoint evaluate_constraints(const ProblemInstance& prob, const Vector& x);

struct ObjectiveValue {
  double value = 0.0;
  Vector gradient;
};

/// Expected objective E[F(x, xi)] for noise level `sigma` and its gradient.
ObjectiveValue true_objective(const ProblemInstance& prob, const Vector& x, double sigma);

enum class Stationarity { KKT, FritzJohn, InfeasibleStationary, None };

const char* to_string(Stationarity s);

struct Multipliers {
  Vector eq;    // lambda, R^m1
  Vector ineq;  // mu, R^m2
};

/// Residuals of the KKT system for the given multipliers, all in the inf-norm.
struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;         // max(|h|, c_+)
  double dual = 0.0;           // max(-mu)_+
  double complementarity = 0.0;  // max |mu_i c_i|

  double max() const;
};

KktResiduals kkt_residuals(const ProblemInstance& prob, const Vector& x, const Multipliers& mult);

inline constexpr double kDefaultKktTolerance = 1e-6;

/// Checks the KKT system first, then the Fritz-John system with a zero
/// objective multiplier, then whether x is an infeasible stationary point of phi.
Stationarity classify_stationarity(const ProblemInstance& prob, const Vector& x,
                                   const Multipliers& mult, double tol = kDefaultKktTolerance);

}  // namespace rssqp
