#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

namespace psb {

/// Deterministic RNG for reproducible experiments. mt19937_64 has a
/// standardized output sequence; the uniform mapping below avoids
/// std::uniform_real_distribution, whose sequence is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  std::uint64_t bits() { return eng_(); }

  /// Unit vector; for n = 1 returns {+-1, 0}.
  std::array<double, 2> unit_vector(int dimension) {
    if (dimension == 1) {
      return {uniform() < 0.5 ? -1.0 : 1.0, 0.0};
    }
    const double theta = uniform(0.0, 2.0 * 3.14159265358979323846);
    return {std::cos(theta), std::sin(theta)};
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace psb
