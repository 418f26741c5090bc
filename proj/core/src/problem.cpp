// SPDX-License-Identifier: Apache-2.0
#include "rssqp/problem.hpp"

#include <algorithm>
#include <cmath>

#include "rssqp/subproblems.hpp"

namespace rssqp {

namespace {

void check_finite(const Vector& v, const std::string& what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) throw EvaluationError(what + " is not finite", static_cast<int>(i));
  }
}

void check_finite(const Matrix& m, const std::string& what) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j))) throw EvaluationError(what + " is not finite", static_cast<int>(j));
    }
  }
}

void check_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const std::string& what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw InvalidArgument(what + " has shape " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected " + std::to_string(rows) +
                          "x" + std::to_string(cols));
  }
}

Vector eval_or_empty(const VectorFunction& fn, const Vector& x) {
  return fn.value ? fn.value(x) : Vector(0);
}

Matrix grad_or_empty(const VectorFunction& fn, const Vector& x) {
  return fn.gradient ? fn.gradient(x) : Matrix(x.size(), 0);
}

}  // namespace

void ProblemInstance::validate() const {
  if (n <= 0) throw InvalidArgument("problem " + name + ": dimension must be positive");
  if (m1 < 0 || m2 < 0) throw InvalidArgument("problem " + name + ": negative constraint count");
  if (x0.size() != n) throw InvalidArgument("problem " + name + ": x0 has wrong dimension");
  for (const auto& s : solutions) {
    if (s.size() != n) throw InvalidArgument("problem " + name + ": solution has wrong dimension");
  }
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (!std::isfinite(weights[i])) throw InvalidArgument("problem " + name + ": non-finite weight");
  }
  if (!(sigma >= 0.0)) throw InvalidArgument("problem " + name + ": sigma must be nonnegative");

  const Vector h = eval_or_empty(eq, x0);
  const Vector c = eval_or_empty(ineq, x0);
  if (h.size() != m1) throw InvalidArgument("problem " + name + ": h has wrong length");
  if (c.size() != m2) throw InvalidArgument("problem " + name + ": c has wrong length");
  check_shape(grad_or_empty(eq, x0), n, m1, "problem " + name + ": grad h");
  check_shape(grad_or_empty(ineq, x0), n, m2, "problem " + name + ": grad c");
  if (!components.value) throw InvalidArgument("problem " + name + ": missing objective components");
  if (components.value(x0).size() != weights.size()) {
    throw InvalidArgument("problem " + name + ": component count differs from weight count");
  }
  check_shape(components.gradient(x0), n, weights.size(), "problem " + name + ": component gradients");
}

double infeasibility(const Vector& h, const Vector& c) {
  double phi = 0.0;
  if (h.size() > 0) phi = std::max(phi, h.cwiseAbs().maxCoeff());
  if (c.size() > 0) phi = std::max(phi, c.maxCoeff());
  return phi;
}

EvalPoint evaluate_constraints(const ProblemInstance& prob, const Vector& x) {
  if (x.size() != prob.n) throw InvalidArgument("evaluate_constraints: point has wrong dimension");
  EvalPoint ep;
  ep.x = x;
  ep.h_val = eval_or_empty(prob.eq, x);
  ep.c_val = eval_or_empty(prob.ineq, x);
  ep.grad_h = grad_or_empty(prob.eq, x);
  ep.grad_c = grad_or_empty(prob.ineq, x);
  check_finite(ep.h_val, "equality constraint");
  check_finite(ep.c_val, "inequality constraint");
  check_finite(ep.grad_h, "equality constraint gradient");
  check_finite(ep.grad_c, "inequality constraint gradient");
  ep.phi = infeasibility(ep.h_val, ep.c_val);
  return ep;
}

ObjectiveValue true_objective(const ProblemInstance& prob, const Vector& x, double sigma) {
  const Vector F = prob.components.value(x);
  const Matrix G = prob.components.gradient(x);
  check_finite(F, "objective component");
  ObjectiveValue out;
  out.value = prob.objective_constant + prob.weights.dot(F.cwiseAbs2()) +
              sigma * sigma * prob.weights.sum();
  out.gradient = G * (2.0 * prob.weights.cwiseProduct(F));
  return out;
}

const char* to_string(Stationarity s) {
  switch (s) {
    case Stationarity::KKT: return "KKT";
    case Stationarity::FritzJohn: return "FritzJohn";
    case Stationarity::InfeasibleStationary: return "InfeasibleStationary";
    case Stationarity::None: return "None";
  }
  return "None";
}

double KktResiduals::max() const {
  return std::max({stationarity, primal, dual, complementarity});
}

namespace {

KktResiduals residuals_scaled(const EvalPoint& ep, const Vector& grad_f, double gamma,
                              const Vector& lambda, const Vector& mu) {
  KktResiduals r;
  Vector stat = gamma * grad_f;
  if (lambda.size() > 0) stat += ep.grad_h * lambda;
  if (mu.size() > 0) stat += ep.grad_c * mu;
  r.stationarity = stat.size() > 0 ? stat.cwiseAbs().maxCoeff() : 0.0;
  r.primal = ep.phi;
  if (mu.size() > 0) {
    r.dual = std::max(0.0, -mu.minCoeff());
    r.complementarity = mu.cwiseProduct(ep.c_val).cwiseAbs().maxCoeff();
  }
  return r;
}

}  // namespace

KktResiduals kkt_residuals(const ProblemInstance& prob, const Vector& x, const Multipliers& mult) {
  const EvalPoint ep = evaluate_constraints(prob, x);
  if (mult.eq.size() != prob.m1 || mult.ineq.size() != prob.m2) {
    throw InvalidArgument("kkt_residuals: multiplier dimensions do not match the problem");
  }
  const Vector grad_f = true_objective(prob, x, 0.0).gradient;
  return residuals_scaled(ep, grad_f, 1.0, mult.eq, mult.ineq);
}

Stationarity classify_stationarity(const ProblemInstance& prob, const Vector& x,
                                   const Multipliers& mult, double tol) {
  const EvalPoint ep = evaluate_constraints(prob, x);
  if (mult.eq.size() != prob.m1 || mult.ineq.size() != prob.m2) {
    throw InvalidArgument("classify_stationarity: multiplier dimensions do not match the problem");
  }
  const Vector grad_f = true_objective(prob, x, 0.0).gradient;

  if (ep.phi <= tol) {
    if (residuals_scaled(ep, grad_f, 1.0, mult.eq, mult.ineq).max() <= tol) {
      return Stationarity::KKT;
    }
    // Fritz-John: rescale (gamma, lambda, mu) = (1, lambda, mu) / ||(lambda, mu)||_inf so a
    // vanishing objective multiplier is admissible.
    double scale = 0.0;
    if (mult.eq.size() > 0) scale = std::max(scale, mult.eq.cwiseAbs().maxCoeff());
    if (mult.ineq.size() > 0) scale = std::max(scale, mult.ineq.cwiseAbs().maxCoeff());
    if (scale > 1.0) {
      const KktResiduals fj =
          residuals_scaled(ep, grad_f, 1.0 / scale, mult.eq / scale, mult.ineq / scale);
      if (fj.max() <= tol) return Stationarity::FritzJohn;
    }
    return Stationarity::None;
  }

  // Infeasible: stationary for phi iff the linearized distance cannot be reduced
  // inside a unit box.
  DistanceLpData lp{ep.h_val, ep.c_val, ep.grad_h, ep.grad_c, 1.0};
  const SubproblemSolution sol = solve_distance_lp(lp);
  if (sol.status == SolveStatus::Optimal && ep.phi - sol.objective_value <= tol) {
    return Stationarity::InfeasibleStationary;
  }
  return Stationarity::None;
}

}  // namespace rssqp
