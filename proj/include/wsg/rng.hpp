#pragma once

#include <cstdint>
#include <cmath>

namespace wsg {

// Deterministic, platform-independent generator (splitmix64 core).
// std::mt19937 distributions vary across standard libraries; everything
// stochastic in this project (corpus sampling, parameter init, batch
// order) goes through this class so that a seed pins the run bit-exactly.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0,1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  uint64_t uniform_index(uint64_t n) { return n ? next_u64() % n : 0; }

  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + int(uniform_index(uint64_t(hi - lo + 1)));
  }

  // Box-Muller; one value per call, the sin branch is discarded.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
  }

  // Independent child stream; used to give each corpus split its own rng.
  Rng fork() { return Rng(next_u64()); }

 private:
  uint64_t state_;
};

// Stateless hash used for batch sampling: (seed, iter, slot) -> u64.
// Keeping batch order a pure function of the seed and iteration makes
// checkpoint resume trivially exact.
inline uint64_t mix_hash(uint64_t a, uint64_t b, uint64_t c) {
  uint64_t z = a * 0x9e3779b97f4a7c15ull + b * 0xbf58476d1ce4e5b9ull + c + 0x94d049bb133111ebull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace wsg
