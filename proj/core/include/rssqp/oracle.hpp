// SPDX-License-Identifier: Apache-2.0
//
// Sample-average estimates of the stochastic objective and its gradient.
//
// With N draws xi^(i) ~ N(0, sigma^2 I) the estimators are
//
//   g  = (1/N) sum_i grad F(x, xi^(i)) = sum_j 2 a_j (F_j(x) + mean_i xi_j^(i)) grad F_j(x)
//   f  = (1/N) sum_i F(x, xi^(i))
//
// Two sampling modes produce the same distribution:
//  * PerSample draws every xi_j^(i) explicitly (cost O(N m)).
//  * Aggregate draws the sufficient statistics directly: the sample mean
//    sigma z / sqrt(N) with z ~ N(0,1), and the centred sum of squares
//    sigma^2 * chi2(N-1), which is independent of the mean for Gaussian draws
//    (cost O(m) regardless of N).
#pragma once

#include <cstdint>
#include <utility>

#include "rssqp/problem.hpp"
#include "rssqp/rng.hpp"

namespace rssqp {

enum class SamplingMode { Aggregate, PerSample };

struct SampleEstimate {
  Vector value;  // length n for gradients, length 1 for function values
  int sample_size = 0;
  Purpose purpose = Purpose::Gradient;
  StreamKey key;

  double scalar() const { return value[0]; }
};

/// Uses the stream (seed, key) with key.purpose forced to Gradient.
SampleEstimate sample_gradient(const ProblemInstance& prob, const Vector& x, double sigma, int N,
                               std::uint64_t seed, StreamKey key,
                               SamplingMode mode = SamplingMode::Aggregate);

/// f0 at x from the F0 stream and fs at x_trial from the independent Fs stream.
std::pair<SampleEstimate, SampleEstimate> sample_function_pair(
    const ProblemInstance& prob, const Vector& x, const Vector& x_trial, double sigma, int N,
    std::uint64_t seed, StreamKey key, SamplingMode mode = SamplingMode::Aggregate);

/// Single function estimate for an explicit purpose (F0 or Fs).
SampleEstimate sample_function(const ProblemInstance& prob, const Vector& x, double sigma, int N,
                               std::uint64_t seed, StreamKey key,
                               SamplingMode mode = SamplingMode::Aggregate);

inline constexpr int kDefaultMaxSampleSize = 1'000'000;

/// ceil(c_scale * V / (kappa^2 alpha^2 ||d||^2) * log(1 / (1 - p))) clamped to [1, n_max].
int required_sample_size(double variance_bound, double kappa, double alpha, double d_norm,
                         double p, double c_scale = 1.0, int n_max = kDefaultMaxSampleSize);

/// E||grad F(x, xi) - grad f(x)||^2 = sum_j 4 a_j^2 sigma^2 ||grad F_j(x)||^2.
double gradient_variance(const ProblemInstance& prob, const Vector& x, double sigma);

/// Var F(x, xi) = sum_j a_j^2 (4 F_j^2 sigma^2 + 2 sigma^4).
double function_variance(const ProblemInstance& prob, const Vector& x, double sigma);

struct AccuracyEvents {
  bool gradient_accurate = false;  // I_k
  bool function_accurate = false;  // J_k
};

/// Compares estimates against the expected objective at noise level `sigma`.
AccuracyEvents accuracy_event_check(const Vector& g_est, double f0_est, double fs_est,
                                    const ProblemInstance& prob, const Vector& x,
                                    const Vector& x_trial, double sigma, double alpha,
                                    const Vector& d, double kappa_g, double eps_f);

}  // namespace rssqp
