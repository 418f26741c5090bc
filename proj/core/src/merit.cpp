// SPDX-License-Identifier: Apache-2.0
#include "rssqp/merit.hpp"

#include <algorithm>
#include <cmath>

#include "rssqp/types.hpp"

namespace rssqp {

double merit_value(double f_est, double phi, double rho) {
  if (!(phi >= 0.0) || !(rho > 0.0)) throw InvalidArgument("merit_value: requires phi >= 0, rho > 0");
  return f_est + rho * phi;
}

double predicted_reduction(const MeritContext& ctx) {
  return -ctx.g_dot_d + ctx.rho * ctx.delta_phi;
}

bool sufficient_reduction(const MeritContext& ctx) {
  return predicted_reduction(ctx) >= 0.5 * ctx.dHd;
}

double update_penalty(const MeritContext& ctx) {
  if (!(ctx.rho > 0.0) || !(ctx.delta_phi >= 0.0) || !(ctx.dHd >= 0.0)) {
    throw InvalidArgument("update_penalty: requires rho > 0, delta_phi >= 0, dHd >= 0");
  }
  if (sufficient_reduction(ctx)) return ctx.rho;
  if (ctx.delta_phi <= kDegenerateDeltaPhi) throw DegeneratePenaltyUpdate(2.0 * ctx.rho);
  double rho = std::max((ctx.g_dot_d + 0.5 * ctx.dHd) / ctx.delta_phi, 2.0 * ctx.rho);
  // The quotient can land one ulp short of restoring the test; nudge upward.
  MeritContext check = ctx;
  check.rho = rho;
  for (int nudge = 0; !sufficient_reduction(check); ++nudge) {
    rho = nudge < 16 ? std::nextafter(rho, HUGE_VAL) : rho * (1.0 + 1e-12);
    check.rho = rho;
  }
  return rho;
}

bool line_search_accept(double psi0, double psis, double alpha, double pred, double theta) {
  if (!(alpha > 0.0) || !(theta > 0.0 && theta < 1.0)) {
    throw InvalidArgument("line_search_accept: requires alpha > 0 and theta in (0, 1)");
  }
  return psi0 - psis >= theta * alpha * pred;
}

}  // namespace rssqp
