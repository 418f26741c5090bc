// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "rssqp/types.hpp"

namespace rssqp {

enum class HessianPolicy { Identity, DampedSecant };

const char* to_string(HessianPolicy p);

/// Symmetrizes H and clips its spectrum into [lo, hi].
Matrix clip_spectrum(const Matrix& H, double lo, double hi);

/// Powell-damped BFGS update for the pair (s, y) followed by spectral
/// clipping into [2 xi, M_H]. Returns the identity when the result is not finite
/// and H unchanged when s is negligible.
Matrix damped_secant_update(const Matrix& H, const Vector& s, const Vector& y, double xi,
                            double M_H);

}  // namespace rssqp
