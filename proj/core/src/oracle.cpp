// SPDX-License-Identifier: Apache-2.0
#include "rssqp/oracle.hpp"

#include <algorithm>
#include <cmath>

namespace rssqp {

namespace {

void check_sampling_args(double sigma, int N) {
  if (N < 1) throw InvalidArgument("sample size must be >= 1");
  if (!(sigma >= 0.0)) throw InvalidArgument("sigma must be >= 0");
}

// Sample means of xi_j, one per component.
Vector draw_means(RngStream& rng, int m, double sigma, int N, SamplingMode mode) {
  Vector mean = Vector::Zero(m);
  if (sigma == 0.0) return mean;
  if (mode == SamplingMode::Aggregate) {
    const double s = sigma / std::sqrt(static_cast<double>(N));
    for (int j = 0; j < m; ++j) mean[j] = s * rng.normal();
    return mean;
  }
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < m; ++j) mean[j] += sigma * rng.normal();
  }
  return mean / static_cast<double>(N);
}

double function_estimate(const ProblemInstance& prob, const Vector& x, double sigma, int N,
                         RngStream& rng, SamplingMode mode) {
  const Vector F = prob.components.value(x);
  const int m = static_cast<int>(F.size());
  double total = prob.objective_constant;
  if (sigma == 0.0) return total + prob.weights.dot(F.cwiseAbs2());
  if (mode == SamplingMode::Aggregate) {
    const double s = sigma / std::sqrt(static_cast<double>(N));
    for (int j = 0; j < m; ++j) {
      const double mean = s * rng.normal();
      const double centred = N > 1 ? sigma * sigma * rng.chi_square(N - 1) : 0.0;
      // (1/N) sum_i (F + xi_i)^2 = F^2 + 2 F mean + (centred / N + mean^2)
      total += prob.weights[j] * (F[j] * F[j] + 2.0 * F[j] * mean + centred / N + mean * mean);
    }
    return total;
  }
  double acc = 0.0;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < m; ++j) {
      const double v = F[j] + sigma * rng.normal();
      acc += prob.weights[j] * v * v;
    }
  }
  return total + acc / N;
}

}  // namespace

SampleEstimate sample_gradient(const ProblemInstance& prob, const Vector& x, double sigma, int N,
                               std::uint64_t seed, StreamKey key, SamplingMode mode) {
  check_sampling_args(sigma, N);
  key.purpose = Purpose::Gradient;
  RngStream rng(seed, key);
  const Vector F = prob.components.value(x);
  const Matrix G = prob.components.gradient(x);
  const Vector mean = draw_means(rng, static_cast<int>(F.size()), sigma, N, mode);
  SampleEstimate est;
  est.value = G * (2.0 * prob.weights.cwiseProduct(F + mean));
  est.sample_size = N;
  est.purpose = Purpose::Gradient;
  est.key = key;
  return est;
}

SampleEstimate sample_function(const ProblemInstance& prob, const Vector& x, double sigma, int N,
                               std::uint64_t seed, StreamKey key, SamplingMode mode) {
  check_sampling_args(sigma, N);
  RngStream rng(seed, key);
  SampleEstimate est;
  est.value = Vector::Constant(1, function_estimate(prob, x, sigma, N, rng, mode));
  est.sample_size = N;
  est.purpose = key.purpose;
  est.key = key;
  return est;
}

std::pair<SampleEstimate, SampleEstimate> sample_function_pair(
    const ProblemInstance& prob, const Vector& x, const Vector& x_trial, double sigma, int N,
    std::uint64_t seed, StreamKey key, SamplingMode mode) {
  StreamKey k0 = key;
  k0.purpose = Purpose::F0;
  StreamKey ks = key;
  ks.purpose = Purpose::Fs;
  return {sample_function(prob, x, sigma, N, seed, k0, mode),
          sample_function(prob, x_trial, sigma, N, seed, ks, mode)};
}

int required_sample_size(double variance_bound, double kappa, double alpha, double d_norm,
                         double p, double c_scale, int n_max) {
  if (!(variance_bound > 0.0 && kappa > 0.0 && alpha > 0.0 && d_norm > 0.0 && c_scale > 0.0)) {
    throw InvalidArgument("required_sample_size: inputs must be positive");
  }
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("required_sample_size: p must lie in (0, 1)");
  const double denom = kappa * kappa * alpha * alpha * d_norm * d_norm;
  const double raw = c_scale * variance_bound / denom * std::log(1.0 / (1.0 - p));
  if (!(raw < static_cast<double>(n_max))) return n_max;
  return std::clamp(static_cast<int>(std::ceil(raw)), 1, n_max);
}

double gradient_variance(const ProblemInstance& prob, const Vector& x, double sigma) {
  const Matrix G = prob.components.gradient(x);
  double v = 0.0;
  for (int j = 0; j < prob.num_components(); ++j) {
    v += 4.0 * prob.weights[j] * prob.weights[j] * sigma * sigma * G.col(j).squaredNorm();
  }
  return v;
}

double function_variance(const ProblemInstance& prob, const Vector& x, double sigma) {
  const Vector F = prob.components.value(x);
  const double s2 = sigma * sigma;
  double v = 0.0;
  for (int j = 0; j < prob.num_components(); ++j) {
    v += prob.weights[j] * prob.weights[j] * (4.0 * F[j] * F[j] * s2 + 2.0 * s2 * s2);
  }
  return v;
}

AccuracyEvents accuracy_event_check(const Vector& g_est, double f0_est, double fs_est,
                                    const ProblemInstance& prob, const Vector& x,
                                    const Vector& x_trial, double sigma, double alpha,
                                    const Vector& d, double kappa_g, double eps_f) {
  const ObjectiveValue at_x = true_objective(prob, x, sigma);
  const ObjectiveValue at_trial = true_objective(prob, x_trial, sigma);
  const double dn = d.norm();
  AccuracyEvents ev;
  ev.gradient_accurate = (g_est - at_x.gradient).norm() <= kappa_g * alpha * dn;
  const double ftol = eps_f * alpha * alpha * dn * dn;
  ev.function_accurate =
      std::abs(f0_est - at_x.value) <= ftol && std::abs(fs_est - at_trial.value) <= ftol;
  return ev;
}

}  // namespace rssqp
