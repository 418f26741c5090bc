// SPDX-License-Identifier: Apache-2.0
//
// Exact l-infinity penalty merit function Psi(x; rho) = f(x) + rho * phi(x),
// its model reduction along a step, the penalty update and the Armijo-type
// acceptance test. The same formulas serve the deterministic driver (exact f)
// and the stochastic driver (sampled f and g).
#pragma once

#include <stdexcept>

namespace rssqp {

struct MeritContext {
  double rho = 1.0;
  double theta = 0.1;
  double delta_phi = 0.0;  // phi - kappa >= 0
  double g_dot_d = 0.0;
  double dHd = 0.0;        // >= 0
};

/// The penalty test failed while delta_phi is (numerically) zero, so no finite
/// rho can restore sufficient reduction.
class DegeneratePenaltyUpdate : public std::runtime_error {
 public:
  explicit DegeneratePenaltyUpdate(double fallback_rho)
      : std::runtime_error("penalty update with vanishing linearized feasibility improvement"),
        fallback_rho_(fallback_rho) {}

  /// 2 * rho, what callers continue with.
  double fallback_rho() const noexcept { return fallback_rho_; }

 private:
  double fallback_rho_;
};

inline constexpr double kDegenerateDeltaPhi = 1e-14;

double merit_value(double f_est, double phi, double rho);

/// -g'd + rho * delta_phi
double predicted_reduction(const MeritContext& ctx);

/// True when the reduction test pred(rho) >= 0.5 d'Hd holds.
bool sufficient_reduction(const MeritContext& ctx);

/// Returns rho unchanged when the reduction test holds, else
/// max{(g'd + 0.5 d'Hd) / delta_phi, 2 rho}. Throws DegeneratePenaltyUpdate when
/// the test fails with delta_phi <= 1e-14.
double update_penalty(const MeritContext& ctx);

/// psi0 - psis >= theta * alpha * pred
bool line_search_accept(double psi0, double psis, double alpha, double pred, double theta);

}  // namespace rssqp
