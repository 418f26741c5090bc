// SPDX-License-Identifier: Apache-2.0
//
// Keyed random streams.
//
// A stream is fully determined by (seed, StreamKey). The key fields are folded
// into a 64-bit value with SplitMix64, which then seeds a xoshiro256** state.
// Normals use the Box-Muller transform (cosine branch first, sine branch
// cached for the next draw); gamma variates use Marsaglia-Tsang. Nothing here
// depends on <random> distributions, whose output is implementation-defined.
#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace rssqp {

enum class Purpose : std::uint8_t { Gradient = 0, F0 = 1, Fs = 2 };

const char* to_string(Purpose p);

struct StreamKey {
  std::uint64_t problem = 0;  // fnv1a64 of the problem name
  std::uint32_t sigma_index = 0;
  std::uint32_t sample_index = 0;
  std::uint32_t trial = 0;
  std::uint64_t iteration = 0;
  Purpose purpose = Purpose::Gradient;

  bool operator==(const StreamKey&) const = default;
};

std::uint64_t fnv1a64(std::string_view s);

std::uint64_t splitmix64(std::uint64_t& state);

class RngStream {
 public:
  RngStream(std::uint64_t seed, const StreamKey& key);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1].
  double uniform_open();
  double normal();
  /// Gamma(shape, 1), shape > 0.
  double gamma(double shape);
  /// Chi-square with k > 0 degrees of freedom.
  double chi_square(double k);

  std::uint64_t seed() const { return seed_; }
  const StreamKey& key() const { return key_; }

 private:
  std::uint64_t seed_;
  StreamKey key_;
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rssqp
