#pragma once

#include "cartan/scalar.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace cartan {

// mt19937_64 is fully specified by the standard; the distributions below are
// written out by hand so reports do not depend on the library's distributions
struct Rng {
  std::mt19937_64 g;
  explicit Rng(std::uint64_t seed) : g(seed) {}

  std::uint64_t bits() { return g(); }
  double uniform() { return double(g() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  long range(long lo, long hi) {
    std::uint64_t span = std::uint64_t(hi - lo) + 1;
    return lo + long(g() % span);
  }
  double normal() {
    double u = uniform(), v = uniform();
    if (u < 1e-300) u = 1e-300;
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * M_PI * v);
  }
  // n/d with |n| <= num_max, 1 <= d <= den_max
  Rat rational(long num_max, long den_max) { return Num<Rat>::from(range(-num_max, num_max), range(1, den_max)); }
  Rat nonzero_rational(long num_max, long den_max) {
    for (;;) {
      Rat r = rational(num_max, den_max);
      if (sgn(r) != 0) return r;
    }
  }
  QR complex_rational(long num_max, long den_max) { return QR(rational(num_max, den_max), rational(num_max, den_max)); }
  QR quat_rational(long num_max, long den_max) {
    return QR(rational(num_max, den_max), rational(num_max, den_max), rational(num_max, den_max), rational(num_max, den_max));
  }
  Rng split() { return Rng(g() ^ 0x9e3779b97f4a7c15ULL); }
};

}  // namespace cartan
