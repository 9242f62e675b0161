#pragma once

#include <cstdint>

namespace escnav {

// Deterministic splitmix64 stream. Results are identical across platforms,
// unlike std:: distributions, so seeded runs stay byte-reproducible.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0.
  uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

  // Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi) {
    return lo + static_cast<int>(uniform_int(static_cast<uint64_t>(hi - lo + 1)));
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Independent child stream keyed by `id`; used to give each episode its
  // own RNG so parallel runs cannot perturb results.
  static uint64_t derive(uint64_t seed, uint64_t id) {
    Rng r(seed ^ (0x632be59bd9b4e019ULL * (id + 1)));
    return r.next_u64();
  }

 private:
  uint64_t state_;
};

}  // namespace escnav
