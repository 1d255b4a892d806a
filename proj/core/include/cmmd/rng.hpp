#ifndef CMMD_RNG_HPP
#define CMMD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace cmmd {

// Deterministic random stream (xoshiro256++ seeded through splitmix64).
// std::mt19937 + std::normal_distribution would tie reproducibility to the
// standard library implementation; results here depend only on this file,
// so identical seeds give identical streams on every build we target.
//
// Substreams are derived by absorbing a path of 64-bit words into the seed
// (Rng::derive(seed, {unit, index})), which keeps Monte Carlo units
// order-independent: trial j draws the same numbers whether or not trials
// before it ran.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { reseed(seed); }

  static std::uint64_t mix(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    std::uint64_t h = splitmix(seed);
    for (std::uint64_t w : path) {
      h ^= splitmix(w + 0x9e3779b97f4a7c15ULL * h);
      h = splitmix(h);
    }
    return h;
  }

  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Rng(mix(seed, path));
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

  // Uniform on [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Unbiased integer in [0, n) by rejection on the top of the range.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  // Standard normal via the polar (Marsaglia) method; trig-free, one spare
  // value cached between calls.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double factor = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * factor;
    have_spare_ = true;
    return u * factor;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  void reseed(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& s : s_) {
      x = splitmix(x);
      s = x;
    }
    // A zero state would be a fixed point of xoshiro; splitmix of any seed
    // makes that astronomically unlikely, but guard anyway.
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x1ULL;
    have_spare_ = false;
  }

  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace cmmd

#endif
