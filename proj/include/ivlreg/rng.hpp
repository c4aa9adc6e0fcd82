#pragma once

#include <cstdint>
#include <cmath>
#include <initializer_list>

namespace ivlreg {

// Deterministic RNG utilities. Everything here is fixed-algorithm on purpose:
// sampled datasets and sweep results must be bit-identical across runs and
// worker counts, so no std::*_distribution anywhere.

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Absorbs one word into a running seed, splitmix finalizer on top.
inline std::uint64_t seed_mix(std::uint64_t acc, std::uint64_t word) {
  std::uint64_t s = acc ^ (word + 0x9e3779b97f4a7c15ull + (acc << 6) + (acc >> 2));
  s = (s ^ (s >> 30)) * 0xbf58476d1ce4e5b9ull;
  s = (s ^ (s >> 27)) * 0x94d049bb133111ebull;
  return s ^ (s >> 31);
}

inline std::uint64_t seed_mix(std::uint64_t acc, std::initializer_list<std::uint64_t> words) {
  for (std::uint64_t w : words) acc = seed_mix(acc, w);
  return acc;
}

// xoshiro256++ seeded through splitmix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64_next(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // [0, 1)
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // One Box-Muller draw per call, twin discarded: stream position stays a
  // pure function of the call count, which keeps per-row streams stable.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1], log is safe
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Uniform integer in [0, bound) via rejection, bound > 0.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

}  // namespace ivlreg
