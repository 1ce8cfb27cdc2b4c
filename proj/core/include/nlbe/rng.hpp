#pragma once

#include <cmath>
#include <cstdint>

namespace nlbe {

// One SplitMix64 step. Used for key mixing and stream derivation only.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double inv_norm_cdf(double p);  // normal.hpp

// xoshiro256** with keyed sub-stream derivation.
//
// Streams are derived purely from (seed, key...) so that work partitioned
// across threads by replicate index draws exactly the same numbers as a
// serial run. Replicate-level code must take one stream per replicate.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  // Child stream for (a, b, c); independent of draw position in the parent.
  Rng stream(std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0) const {
    std::uint64_t k = s_[0];
    k = mix(k, a);
    k = mix(k ^ s_[1], b);
    k = mix(k ^ s_[2], c);
    return Rng(k ^ s_[3]);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double u01() { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }

  double gauss() { return inv_norm_cdf(u01()); }
  double gauss(double mean, double sd) { return mean + sd * gauss(); }

  // Unit-rate exponential.
  double expo() { return -std::log1p(-u01()); }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next() % n; }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  static std::uint64_t mix(std::uint64_t h, std::uint64_t v) {
    std::uint64_t st = h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
    return splitmix64(st);
  }

  std::uint64_t s_[4];
};

}  // namespace nlbe
