#pragma once

#include <cmath>
#include <cstdint>

namespace emdsketch {

// All randomness in the library flows from 64-bit seeds through splitmix64
// chains. No std:: distributions are used anywhere: their output is
// implementation-defined and would break byte-identical reports.

inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline uint64_t mix64(uint64_t z) {
  z ^= z >> 33;
  z *= 0xff51afd7ed558ccdULL;
  z ^= z >> 33;
  z *= 0xc4ceb9fe1a85ec53ULL;
  z ^= z >> 33;
  return z;
}

// Hierarchical seed derivation: child streams are keyed by small tag ids
// (module, pipeline, trial) so every component draws from a disjoint stream.
inline uint64_t derive_seed(uint64_t root, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t s = root;
  s = mix64(s ^ (0x100000001b3ULL * (a + 1)));
  s = mix64(s ^ (0x100000001b3ULL * (b + 2)));
  s = mix64(s ^ (0x100000001b3ULL * (c + 3)));
  return s;
}

// Value in the open interval (0, 1).
inline double to_unit(uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Deterministic entry of an implicit random matrix, keyed by (seed, row, col).
inline uint64_t counter_hash(uint64_t seed, uint64_t row, uint64_t col) {
  uint64_t h = seed;
  h = mix64(h ^ (row * 0x9e3779b97f4a7c15ULL + 0x7f4a7c15ULL));
  h = mix64(h ^ (col * 0xbf58476d1ce4e5b9ULL + 0x1ce4e5b9ULL));
  return h;
}

// Sequential generator over a splitmix64 stream.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() { return splitmix64(state_); }

  double uniform() { return to_unit(next()); }

  // Uniform in [0, n). Unbiased; exact for powers of two.
  uint64_t below(uint64_t n) {
    if ((n & (n - 1)) == 0) return next() & (n - 1);
    uint64_t threshold = (~uint64_t{0} - n + 1) % n;
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  int uniform_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
  }

  double gaussian() {
    // Box-Muller; two uniforms per draw, cached pair not kept for determinism
    // simplicity.
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double cauchy() { return std::tan(3.141592653589793 * (uniform() - 0.5)); }

 private:
  uint64_t state_;
};

// Standard Cauchy variate (scale 1) for the implicit sketch matrix.
inline double cauchy_entry(uint64_t seed, uint64_t row, uint64_t col) {
  return std::tan(3.141592653589793 * (to_unit(counter_hash(seed, row, col)) - 0.5));
}

}  // namespace emdsketch
