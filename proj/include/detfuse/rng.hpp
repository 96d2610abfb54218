#pragma once

#include <cstdint>

namespace detfuse {

// SplitMix64 (Steele, Lea & Flood). The whole generator is three lines of
// 64-bit arithmetic with fixed constants, so seeded splits and synthetic
// fixtures reproduce bit-for-bit on any platform or language.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform in [0, n) via 128-bit multiply-shift. n must be > 0.
  std::uint64_t bounded(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  // Seed for sub-stream `index` of `seed`. Gives every image its own
  // generator so per-image work is independent of processing order.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) noexcept {
    return SplitMix64(seed + (index + 1) * 0x9e3779b97f4a7c15ULL).next();
  }

 private:
  std::uint64_t state_;
};

}  // namespace detfuse
