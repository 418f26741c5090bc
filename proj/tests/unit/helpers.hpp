// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <initializer_list>

#include "rssqp/problem.hpp"

namespace rssqp::test {

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline VectorFunction empty_map(int n) {
  return {[](const Vector&) { return Vector(0); }, [n](const Vector&) { return Matrix(n, 0); }};
}

/// Unconstrained problem with objective sum_i a_i (F_i(x) + xi_i)^2.
inline ProblemInstance unconstrained(int n, Vector weights, VectorFunction components,
                                     double sigma = 0.0) {
  ProblemInstance p;
  p.name = "unit";
  p.n = n;
  p.eq = empty_map(n);
  p.ineq = empty_map(n);
  p.weights = std::move(weights);
  p.components = std::move(components);
  p.sigma = sigma;
  p.x0 = Vector::Zero(n);
  return p;
}

/// F(x) = x (identity components) on R^n.
inline VectorFunction identity_components(int n) {
  return {[](const Vector& x) { return x; }, [n](const Vector&) { return Matrix::Identity(n, n); }};
}

}  // namespace rssqp::test
