#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "semreg/geometry.hpp"

namespace semreg {

/// xorshift64* generator with the 12/25/27 shift triple and multiplier
/// 0x2545F4914F6CDD1D. Fixture generation uses this single documented
/// algorithm so outputs are byte-reproducible across implementations.
class XorShift64Star {
 public:
  explicit XorShift64Star(std::uint64_t seed)
      : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

  std::uint64_t next() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545f4914f6cdd1dULL;
  }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Box-Muller, one normal per call (second variate discarded).
  double normal(double mean = 0.0, double sigma = 1.0) {
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    return mean + sigma * std::sqrt(-2.0 * std::log(u1)) *
                      std::cos(2.0 * M_PI * u2);
  }

  /// Uniform integer in [0, n). Modulo reduction; the bias at 64 bits is
  /// negligible for fixture sizes.
  std::uint64_t below(std::uint64_t n) { return n ? next() % n : 0; }

  Vec3 normal_vec3(double sigma = 1.0) {
    return Vec3(normal(0.0, sigma), normal(0.0, sigma), normal(0.0, sigma));
  }

  Mat3 random_rotation();

  /// k distinct indices from [0, n), partial Fisher-Yates order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t k);

 private:
  std::uint64_t state_;
};

}  // namespace semreg
