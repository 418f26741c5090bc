// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "helpers.hpp"
#include "rssqp/oracle.hpp"
#include "rssqp/rng.hpp"
#include "rssqp/suite.hpp"

using namespace rssqp;
using rssqp::test::vec;

namespace {

// Independent transcription of the documented generator: SplitMix64 key
// folding, xoshiro256**, Box-Muller with the cosine branch first.
struct ReferenceStream {
  std::uint64_t s[4];

  static std::uint64_t mix(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  ReferenceStream(std::uint64_t seed, const StreamKey& k) {
    std::uint64_t h = seed;
    for (std::uint64_t v : {k.problem, std::uint64_t{k.sigma_index}, std::uint64_t{k.sample_index},
                            std::uint64_t{k.trial}, k.iteration,
                            static_cast<std::uint64_t>(k.purpose)}) {
      h ^= v;
      h = mix(h);
    }
    for (auto& w : s) w = mix(h);
  }

  std::uint64_t next() {
    auto rotl = [](std::uint64_t x, int r) { return (x << r) | (x >> (64 - r)); };
    const std::uint64_t out = rotl(s[1] * 5, 7) * 9;
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return out;
  }

  double first_normal() {
    const double u1 = (static_cast<double>(next() >> 11) + 1.0) / 9007199254740992.0;
    const double u2 = static_cast<double>(next() >> 11) / 9007199254740992.0;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
};

ProblemInstance scalar_identity(double sigma) {
  return test::unconstrained(1, vec({1.0}), test::identity_components(1), sigma);
}

StreamKey key_for(std::uint32_t trial, std::uint64_t iteration = 0) {
  StreamKey k;
  k.problem = fnv1a64("unit");
  k.trial = trial;
  k.iteration = iteration;
  return k;
}

}  // namespace

TEST(Rng, Fnv1aKnownValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(Rng, SplitMixKnownValue) {
  std::uint64_t s = 0;
  EXPECT_EQ(splitmix64(s), 0xe220a8397b1dcdafULL);
}

TEST(Rng, StreamsMatchReferenceTranscription) {
  for (std::uint32_t t = 0; t < 5; ++t) {
    StreamKey k = key_for(t, 17);
    k.purpose = Purpose::Fs;
    RngStream a(99, k);
    ReferenceStream b(99, k);
    for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next());
  }
}

TEST(Rng, DistinctKeysGiveDistinctStreams) {
  StreamKey k0 = key_for(0);
  StreamKey k1 = k0;
  k1.purpose = Purpose::F0;
  RngStream a(1, k0), b(1, k1);
  EXPECT_NE(a.next_u64(), b.next_u64());
}

TEST(Rng, NormalMomentsAreStandard) {
  RngStream r(5, key_for(0));
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
}

TEST(Rng, ChiSquareMean) {
  RngStream r(6, key_for(0));
  for (double k : {0.5, 3.0, 99.0}) {
    double s = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) s += r.chi_square(k);
    EXPECT_NEAR(s / n, k, 5.0 * std::sqrt(2.0 * k / n)) << k;
  }
}

TEST(SampleGradient, ZeroNoiseIsExact) {
  const ProblemInstance p = build_adapted_problem("HS06", 0.0);
  const Vector g = sample_gradient(p, p.x0, 0.0, 50, 1, key_for(0)).value;
  EXPECT_EQ(g, true_objective(p, p.x0, 0.0).gradient);
}

TEST(SampleGradient, SeededScalarMatchesDocumentedGenerator) {
  const ProblemInstance p = scalar_identity(1.0);
  const StreamKey k = key_for(3, 8);
  for (SamplingMode mode : {SamplingMode::Aggregate, SamplingMode::PerSample}) {
    ReferenceStream ref(42, k);
    double mean = 0.0;
    if (mode == SamplingMode::Aggregate) {
      mean = ref.first_normal() / 2.0;  // sigma / sqrt(N)
    } else {
      // Box-Muller pairs: cosine then sine branch of the same uniforms.
      for (int pair = 0; pair < 2; ++pair) {
        const double u1 = (static_cast<double>(ref.next() >> 11) + 1.0) / 9007199254740992.0;
        const double u2 = static_cast<double>(ref.next() >> 11) / 9007199254740992.0;
        const double r = std::sqrt(-2.0 * std::log(u1));
        mean += r * std::cos(2.0 * std::numbers::pi * u2) + r * std::sin(2.0 * std::numbers::pi * u2);
      }
      mean /= 4.0;
    }
    const double g = sample_gradient(p, vec({1.0}), 1.0, 4, 42, k, mode).value[0];
    EXPECT_NEAR(g, 2.0 * (1.0 + mean), 1e-15);
  }
}

TEST(SampleGradient, DeterministicAcrossThreads) {
  const ProblemInstance p = build_adapted_problem("HS31", 1.0);
  const Vector ref = sample_gradient(p, p.x0, 1.0, 1000, 77, key_for(4, 9), SamplingMode::PerSample).value;
  std::vector<Vector> out(4);
  {
    std::vector<std::jthread> pool;
    for (int i = 0; i < 4; ++i) {
      pool.emplace_back([&, i] {
        out[i] = sample_gradient(p, p.x0, 1.0, 1000, 77, key_for(4, 9), SamplingMode::PerSample).value;
      });
    }
  }
  for (const Vector& v : out) EXPECT_EQ(v, ref);
}

TEST(SampleGradient, LargeSampleErrorIsSmall) {
  const ProblemInstance p = build_adapted_problem("HS06", 1.0);
  const Vector truth = true_objective(p, p.x0, 1.0).gradient;
  int good = 0;
  for (std::uint32_t t = 0; t < 100; ++t) {
    const Vector g = sample_gradient(p, p.x0, 1.0, 10000, 2024, key_for(t)).value;
    if ((g - truth).norm() < 0.1) ++good;
  }
  EXPECT_GE(good, 95);
}

TEST(SampleGradient, UnbiasedOnSuiteProblems) {
  for (const char* id : {"HS06", "HS31", "S316"}) {
    const ProblemInstance p = build_adapted_problem(id, 1.0);
    const Vector truth = true_objective(p, p.x0, 1.0).gradient;
    const int reps = 10000;
    Vector sum = Vector::Zero(p.n), sum2 = Vector::Zero(p.n);
    for (int t = 0; t < reps; ++t) {
      const Vector g = sample_gradient(p, p.x0, 1.0, 10, 3, key_for(static_cast<std::uint32_t>(t))).value;
      sum += g;
      sum2 += g.cwiseProduct(g);
    }
    const Vector mean = sum / reps;
    for (int i = 0; i < p.n; ++i) {
      const double var = sum2[i] / reps - mean[i] * mean[i];
      const double se = std::sqrt(std::max(var, 0.0) / reps);
      EXPECT_LE(std::abs(mean[i] - truth[i]), 4.0 * se + 1e-12) << id << " component " << i;
    }
  }
}

TEST(SampleGradient, VarianceScalesInverselyWithSampleSize) {
  const ProblemInstance p = build_adapted_problem("HS06", 1.0);
  for (SamplingMode mode : {SamplingMode::Aggregate, SamplingMode::PerSample}) {
    auto variance = [&](int N) {
      const int reps = 4000;
      double s = 0.0, s2 = 0.0;
      for (int t = 0; t < reps; ++t) {
        const double g =
            sample_gradient(p, p.x0, 1.0, N, 8, key_for(static_cast<std::uint32_t>(t), N), mode).value[0];
        s += g;
        s2 += g * g;
      }
      return s2 / reps - (s / reps) * (s / reps);
    };
    const double ratio = variance(25) / variance(100);
    EXPECT_NEAR(ratio, 4.0, 0.8) << (mode == SamplingMode::Aggregate ? "aggregate" : "per-sample");
  }
}

TEST(SampleFunction, ZeroNoiseIsSumOfSquares) {
  const ProblemInstance p = build_adapted_problem("HS14", 0.0);
  const auto [f0, fs] = sample_function_pair(p, p.x0, p.solutions[0], 0.0, 100, 1, key_for(0));
  EXPECT_DOUBLE_EQ(f0.scalar(), true_objective(p, p.x0, 0.0).value);
  EXPECT_DOUBLE_EQ(fs.scalar(), true_objective(p, p.solutions[0], 0.0).value);
  EXPECT_EQ(f0.purpose, Purpose::F0);
  EXPECT_EQ(fs.purpose, Purpose::Fs);
}

TEST(SampleFunction, AggregateAndPerSampleAgreeInMean) {
  const ProblemInstance p = scalar_identity(1.0);
  for (SamplingMode mode : {SamplingMode::Aggregate, SamplingMode::PerSample}) {
    StreamKey k = key_for(0);
    k.purpose = Purpose::F0;
    double s = 0.0;
    const int reps = 20000;
    for (int t = 0; t < reps; ++t) {
      k.trial = static_cast<std::uint32_t>(t);
      s += sample_function(p, vec({1.0}), 1.0, 5, 4, k, mode).scalar();
    }
    // E = F^2 + sigma^2 = 2, Var of the mean of 5 draws = (4 + 2) / 5.
    EXPECT_NEAR(s / reps, 2.0, 4.0 * std::sqrt(1.2 / reps));
  }
}

TEST(RequiredSampleSize, Arithmetic) {
  EXPECT_EQ(required_sample_size(1.0, 1.0, 1.0, 1.0, 0.5), 1);
  EXPECT_EQ(required_sample_size(1000.0, 1.0, 1.0, 1.0, 0.5), static_cast<int>(std::ceil(1000.0 * std::log(2.0))));
}

TEST(RequiredSampleSize, DoublingStepQuartersSize) {
  const int a = required_sample_size(4e5, 1.0, 1.0, 1.0, 0.9);
  const int b = required_sample_size(4e5, 1.0, 1.0, 2.0, 0.9);
  EXPECT_NEAR(static_cast<double>(a) / b, 4.0, 1e-4);
}

TEST(RequiredSampleSize, ProbabilityNearOneHitsCap) {
  EXPECT_EQ(required_sample_size(100.0, 1.0, 1.0, 1.0, 1.0 - 1e-15, 1.0, 1000), 1000);
  EXPECT_THROW(required_sample_size(1.0, 1.0, 1.0, 1.0, 1.0), InvalidArgument);
}

TEST(AccuracyEvents, ExactEstimatesAreAccurate) {
  const ProblemInstance p = build_adapted_problem("HS06", 0.0);
  const Vector d = vec({0.1, 0.2});
  const Vector xt = p.x0 + d;
  const auto ev = accuracy_event_check(true_objective(p, p.x0, 0.0).gradient,
                                       true_objective(p, p.x0, 0.0).value,
                                       true_objective(p, xt, 0.0).value, p, p.x0, xt, 0.0, 1.0, d,
                                       1.0, 1.0);
  EXPECT_TRUE(ev.gradient_accurate);
  EXPECT_TRUE(ev.function_accurate);
}

TEST(AccuracyEvents, LargeGradientErrorIsInaccurate) {
  const ProblemInstance p = build_adapted_problem("HS06", 0.0);
  const Vector d = vec({0.1, 0.2});
  const double alpha = 0.5, kappa_g = 1.0;
  const Vector g = true_objective(p, p.x0, 0.0).gradient +
                   vec({2.0 * kappa_g * alpha * d.norm(), 0.0});
  const double f0 = true_objective(p, p.x0, 0.0).value;
  const double fs = true_objective(p, p.x0 + alpha * d, 0.0).value;
  EXPECT_FALSE(accuracy_event_check(g, f0, fs, p, p.x0, p.x0 + alpha * d, 0.0, alpha, d, kappa_g, 1.0)
                   .gradient_accurate);
}

TEST(AccuracyEvents, GradientAccuracyFrequencyGrowsWithSampleSize) {
  const ProblemInstance p = build_adapted_problem("HS06", 1.0);
  const Vector d = vec({0.05, 0.05});
  const double alpha = 1.0;
  const Vector xt = p.x0 + alpha * d;
  double last = -1.0;
  for (int N : {10, 100, 1000, 10000}) {
    int hits = 0;
    for (std::uint32_t t = 0; t < 1000; ++t) {
      const Vector g = sample_gradient(p, p.x0, 1.0, N, 31, key_for(t, N)).value;
      hits += accuracy_event_check(g, 0.0, 0.0, p, p.x0, xt, 1.0, alpha, d, 1.0, 1.0).gradient_accurate;
    }
    const double freq = hits / 1000.0;
    EXPECT_GE(freq, last) << N;
    last = freq;
  }
}

TEST(Variances, ClosedForms) {
  const ProblemInstance p = test::unconstrained(1, vec({2.0}), test::identity_components(1), 1.0);
  EXPECT_DOUBLE_EQ(gradient_variance(p, vec({3.0}), 0.5), 4.0 * 4.0 * 0.25);
  EXPECT_DOUBLE_EQ(function_variance(p, vec({3.0}), 0.5), 4.0 * (4.0 * 9.0 * 0.25 + 2.0 * 0.0625));
}
