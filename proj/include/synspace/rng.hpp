#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace synspace {

/// mt19937_64 with distribution code of our own: std:: distributions are
/// implementation-defined and would break byte-identical outputs across
/// standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(kTwoPi * u2);
    has_spare_ = true;
    return r * std::cos(kTwoPi * u2);
  }

  std::vector<double> gaussian(std::size_t dim) {
    std::vector<double> v(dim);
    for (auto& x : v) x = normal();
    return v;
  }

  /// Uniform direction on the unit sphere.
  std::vector<double> direction(std::size_t dim) {
    auto v = gaussian(dim);
    double sq = 0.0;
    for (double x : v) sq += x * x;
    const double n = std::sqrt(sq);
    for (double& x : v) x /= n;
    return v;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace synspace
