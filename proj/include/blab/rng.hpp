#ifndef BLAB_RNG_HPP
#define BLAB_RNG_HPP

#include <cstdint>

namespace blab {

/// SplitMix64. All randomness in the toolkit flows through this generator so
/// runs reproduce bit-for-bit from the config seed (constants documented in
/// the README for cross-language ports).
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next_u64() {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [-1, 1).
  double next_signed() { return 2.0 * next_double() - 1.0; }
};

}  // namespace blab

#endif  // BLAB_RNG_HPP
