#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

namespace cellsieve {

/// splitmix64: the state advances by the golden-ratio increment and each
/// output goes through the standard 64-bit finalizer.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // ((x >> 11) + 0.5) * 2^-53, strictly inside (0, 1).
  double uniform_open() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  // Uniform in [0, n) by modulo with rejection of the biased low range.
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t threshold = (0 - bound) % bound;
    std::uint64_t x = next();
    while (x < threshold) x = next();
    return static_cast<std::size_t>(x % bound);
  }

 private:
  std::uint64_t state_;
};

/// Box-Muller on pairs of open uniforms (u1, u2): emits
/// sqrt(-2 ln u1) cos(2 pi u2) first, then the matching sine term.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : rng_(seed) {}

  double next();
  double next(double mean, double sd) { return mean + sd * next(); }
  SplitMix64& engine() { return rng_; }

 private:
  SplitMix64 rng_;
  std::optional<double> spare_;
};

}  // namespace cellsieve
