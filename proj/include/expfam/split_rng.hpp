#pragma once

#include <cmath>
#include <cstdint>

namespace expfam {

/// Counter-based deterministic random generator: (seed, index) -> draw, with
/// no mutable state. The same seed and index give the same draw on every
/// run and under any thread count, so sampling loops can be parallelized by
/// index without losing reproducibility.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : seed_(seed) {}

  /// Derive an independent stream (e.g. one per sampling purpose).
  SplitRng stream(std::uint64_t tag) const { return SplitRng(mix(seed_ ^ (tag * 0x9E3779B97F4A7C15ull))); }

  std::uint64_t bits(std::uint64_t index) const {
    return mix(seed_ + (index + 1) * 0x9E3779B97F4A7C15ull);
  }

  /// Uniform draw in the open interval (0,1).
  double uniform01(std::uint64_t index) const {
    return (static_cast<double>(bits(index) >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; consumes uniform indices 2i and 2i+1.
  double normal(std::uint64_t index) const {
    const double u1 = uniform01(2 * index);
    const double u2 = uniform01(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  std::uint64_t seed() const { return seed_; }

 private:
  // SplitMix64 finalizer.
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
};

}  // namespace expfam
