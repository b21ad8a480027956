#pragma once

#include <cmath>
#include <cstdint>

static_assert(sizeof(__int128) == 16, "128-bit integers required");

namespace expfam::detail {

/// Order-independent summation of doubles with a known magnitude bound.
///
/// Each term is scaled onto a power-of-two grid chosen from `bound` and
/// truncated to an integer; the integers are accumulated in 128 bits.
/// Integer addition commutes and associates, so the result is identical for
/// any insertion order, any thread count, and any chunking. That is what
/// makes the softmax reductions permutation-equivariant and bit-reproducible
/// in parallel. Quantization error is below 2^-88 relative to `bound`
/// (capacity: up to 2^26 terms before the accumulator could overflow).
class BoundedSum {
 public:
  explicit BoundedSum(double bound) {
    if (bound > 0.0 && std::isfinite(bound)) {
      const int e = std::ilogb(bound);  // 2^e <= bound < 2^(e+1)
      to_grid_ = std::ldexp(1.0, 99 - e);
      from_grid_ = std::ldexp(1.0, e - 99);
    } else {
      to_grid_ = 1.0;
      from_grid_ = 1.0;
    }
  }

  void add(double term) {
    // |y| < 2^100; split into two exact int64 words instead of one
    // double->int128 conversion (the latter is a libgcc call).
    const double y = term * to_grid_;
    const auto hi = static_cast<std::int64_t>(y * 0x1p-63);
    const auto lo = static_cast<std::int64_t>(y - static_cast<double>(hi) * 0x1p63);
    hi_ += hi;
    lo_ += lo;
  }

  double value() const {
    const __int128 total = (static_cast<__int128>(hi_) << 63) + lo_;
    return static_cast<double>(total) * from_grid_;
  }

 private:
  __int128 hi_ = 0;
  __int128 lo_ = 0;
  double to_grid_;
  double from_grid_;
};

}  // namespace expfam::detail
