// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

namespace hubq {

/// SplitMix64 stream.  Stateless per step: output i of stream (seed, r) is
/// mix(key(seed, r) + (i+1) * GAMMA), so any (seed, replication) pair names
/// an independent, reproducible stream on every platform.  Used instead of
/// <random> engines/distributions because those are not bit-stable across
/// standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed, uint64_t stream = 0)
      : state_(mix(seed ^ mix(stream * kGamma + kGamma))) {}

  uint64_t next_u64() {
    state_ += kGamma;
    return mix(state_);
  }

  /// Uniform draw in (0, 1]; never returns 0 so -log(u) is always finite.
  double next_unit() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Exponential holding time with the given rate.
  double next_exponential(double rate) { return -std::log(next_unit()) / rate; }

 private:
  static constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  uint64_t state_;
};

}  // namespace hubq
