// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rssqp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Outcome of an LP or QP solve.
enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIterations, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "NumericalFailure";
}

/// A problem callback returned a NaN or infinity.
class EvaluationError : public std::runtime_error {
 public:
  EvaluationError(const std::string& what, int component)
      : std::runtime_error(what + " (component " + std::to_string(component) + ")"),
        component_(component) {}

  int component() const noexcept { return component_; }

 private:
  int component_;
};

/// Input sizes or values violate an operation's preconditions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace rssqp
