// SPDX-License-Identifier: Apache-2.0
#ifndef RYDSIM_RNG_HPP
#define RYDSIM_RNG_HPP

#include <cmath>
#include <cstdint>

#include "rydsim/constants.hpp"

namespace rydsim {

/// splitmix64 finalizer; full-avalanche 64-bit mix.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: every draw is a pure function of
/// (seed, stream, index), so parallel generation is schedule independent and
/// identical seeds give bit-identical streams.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix64(seed ^ mix64(stream ^ 0xA5A5A5A5A5A5A5A5ULL))) {}

  std::uint64_t bits(std::uint64_t index) const {
    return mix64(key_ + index * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform in [0, 1).
  double uniform(std::uint64_t index) const {
    return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; one draw consumes counter slots
  /// (2*index, 2*index + 1).
  double normal(std::uint64_t index) const {
    const double u1 = (static_cast<double>(bits(2 * index) >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(bits(2 * index + 1) >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(constants::two_pi * u2);
  }

 private:
  std::uint64_t key_;
};

}  // namespace rydsim

#endif  // RYDSIM_RNG_HPP
