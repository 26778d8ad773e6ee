#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace specfield {

/// Seeded Gaussian generator with an explicit Box-Muller transform.
/// std::normal_distribution is implementation-defined; spelling the
/// transform out keeps same-seed streams identical across compilers,
/// which the dataset determinism contract depends on.
class GaussianRng {
public:
  explicit GaussianRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

} // namespace specfield
