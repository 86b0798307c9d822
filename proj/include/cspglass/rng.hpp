#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace cspglass {

// splitmix64 (Steele/Lea/Flood; Vigna's fixed-increment variant).
// One 64-bit word of state, passes BigCrush, and substreams can be split off
// by hashing labels into fresh seeds, so parallel sampling order never
// changes results. All distributions below are implemented by hand: seeded
// output must be byte-identical across platforms and standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1), 53-bit resolution
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in (0, 1]
  double next_open_double() { return 1.0 - next_double(); }

  // unbiased uniform in [0, bound); Lemire's multiply-shift rejection
  std::uint64_t next_below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      std::uint64_t t = (0 - bound) % bound;
      while (lo < t) {
        m = static_cast<unsigned __int128>(next()) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  int next_sign() { return (next() >> 63) ? 1 : -1; }

  // standard normal via the Marsaglia polar method; the paired draw is cached
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  // Pois(mean) by counting unit-rate exponential arrivals up to `mean`.
  // O(mean) uniforms, no underflow for large means (unlike the product form).
  std::uint64_t next_poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    double acc = 0.0;
    std::uint64_t k = 0;
    while (true) {
      acc += -std::log(next_open_double());
      if (acc >= mean) return k;
      ++k;
    }
  }

  SplitMix64 split(std::initializer_list<std::uint64_t> labels) const {
    std::uint64_t s = state_;
    for (std::uint64_t l : labels) s = hash_step(s ^ (l + 0x9E3779B97F4A7C15ull));
    return SplitMix64(hash_step(s));
  }

 private:
  static std::uint64_t hash_step(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Derive a fresh seed from a master seed plus stream labels.
inline std::uint64_t derive_seed(std::uint64_t seed,
                                 std::initializer_list<std::uint64_t> labels) {
  SplitMix64 r = SplitMix64(seed).split(labels);
  return r.next();
}

}  // namespace cspglass
