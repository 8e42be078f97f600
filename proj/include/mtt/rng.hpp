#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mtt/types.hpp"

namespace mtt {

/// splitmix64 mixing step; used to derive independent stream keys.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministic RNG. The engine is std::mt19937_64 (sequence pinned by the
/// standard); all variate transforms are hand-rolled so that identical seeds
/// give identical draws on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  /// Independent stream keyed by up to three counters (trial, pass, particle).
  static Rng stream(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ a);
    k = splitmix64(k ^ b);
    k = splitmix64(k ^ c);
    return Rng(k);
  }

  /// Uniform in [0, 1).
  double uniform() {
    return (eng_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Marsaglia polar method.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  /// Exponential with unit rate.
  double exponential() { return -std::log1p(-uniform()); }

  Vec3 normal3() { return Vec3(normal(), normal(), normal()); }

  VecX normal_vec(int n) {
    VecX z(n);
    for (int i = 0; i < n; ++i) z[i] = normal();
    return z;
  }

  uint64_t raw() { return eng_(); }

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mtt
