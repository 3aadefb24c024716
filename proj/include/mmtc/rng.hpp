/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mmtc {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// xoshiro256** engine; satisfies UniformRandomBitGenerator so it can
/// drive the <random> distributions.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s = splitmix64(s);
      w = s;
    }
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::array<std::uint64_t, 4> state_{};
};

/// Purposes of independent substreams inside one realization.
enum class StreamTag : std::uint32_t { Topology = 1, Cluster = 2, Phase1 = 3, Permutation = 4, Relay = 5 };

/// Seed of the substream for (realization, attempt, purpose, entity). Any
/// entity's draws are fixed by these coordinates alone, so results do not
/// depend on evaluation order or thread count.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t realization, std::uint32_t attempt, StreamTag tag,
                                 std::uint64_t index) {
  std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ realization);
  h = splitmix64(h ^ ((static_cast<std::uint64_t>(attempt) << 32) | static_cast<std::uint32_t>(tag)));
  return splitmix64(h ^ index);
}

inline Xoshiro256 make_stream(std::uint64_t master, std::uint64_t realization, std::uint32_t attempt, StreamTag tag,
                              std::uint64_t index) {
  return Xoshiro256(stream_seed(master, realization, attempt, tag, index));
}

}  // namespace mmtc
