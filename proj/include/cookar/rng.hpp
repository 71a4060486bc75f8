#pragma once

#include <cstdint>

namespace cookar {

/// SplitMix64 stream. Every seeded random choice in the library goes through
/// this generator so results are identical on every platform and standard
/// library (std:: distributions are implementation-defined).
class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 bits of resolution.
  constexpr double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi]. Returns lo when lo == hi.
  constexpr double uniform(double lo, double hi) noexcept {
    if (!(hi > lo)) return lo;
    const double v = lo + uniform() * (hi - lo);
    return v > hi ? hi : v;
  }

  /// Unbiased integer in [0, bound). bound must be non-zero.
  constexpr std::uint64_t below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  /// Uniform integer in [lo, hi].
  constexpr std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept {
    if (hi <= lo) return lo;
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

 private:
  std::uint64_t state_;
};

/// One-shot mix of a value; used to derive independent sub-seeds.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  SplitMix64 g(seed ^ (salt * 0xD1B54A32D192ED03ULL));
  return g.next();
}

}  // namespace cookar
