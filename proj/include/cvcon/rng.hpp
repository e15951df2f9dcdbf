#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace cvcon {

/// SplitMix64 finalizer; bijective 64-bit mixing.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a hash of a phase name. Phase tags are part of the reproducibility
/// contract: changing a name changes every stream derived from it.
constexpr std::uint64_t phase_tag(std::string_view name) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator, but callers in
/// this library use uniform()/below() so results do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t key) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;

  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t s_[4];
};

/// Derives an independent stream from (seed, phase tag, index, sub-index):
/// key = mix64(mix64(mix64(mix64(seed) ^ tag) ^ index) ^ sub).
/// Each Monte Carlo trial owns one stream, so results do not depend on how
/// trials are scheduled across workers.
Rng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index, std::uint64_t sub = 0) noexcept;

}  // namespace cvcon
