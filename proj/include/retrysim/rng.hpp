#pragma once

#include <cmath>
#include <cstdint>

namespace retrysim {

// SplitMix64. Small, fast, and fully specified, so that streams are
// reproducible independent of the standard library implementation.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  // Uniform in (0, 1].
  double next_unit() {
    return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
  }

  // Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

// Normal(0, sigma) truncated to [-bound, bound] by rejection.
inline double truncated_normal(SplitMix64& rng, double sigma, double bound) {
  if (sigma <= 0.0) return 0.0;
  for (;;) {
    double u1 = rng.next_unit();
    double u2 = rng.next_unit();
    double z = std::sqrt(-2.0 * std::log(u1)) *
               std::cos(6.283185307179586476925286766559 * u2) * sigma;
    if (z >= -bound && z <= bound) return z;
  }
}

// Exponential with the given mean.
inline double exponential(SplitMix64& rng, double mean) {
  return -std::log(rng.next_unit()) * mean;
}

}  // namespace retrysim
