#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

// Deterministic random number generation. Every stochastic routine in this
// library takes an explicit 64-bit seed; sub-streams are derived with
// splitmix64 so that results are reproducible bit-for-bit for a given seed,
// independent of platform or standard-library vendor.

namespace kdx {

/// splitmix64 (Steele, Lea, Vigna). Used for seed expansion and for deriving
/// independent sub-stream seeds from a root seed.
class SplitMix64 {
 public:
  constexpr explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  constexpr std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// xoshiro256++ 1.0 (Blackman, Vigna). The generator used for all sampling.
/// State is expanded from the seed through splitmix64, as recommended by the
/// authors; an all-zero state is unreachable this way.
class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) {
    SplitMix64 sm(seed);
    for (auto& word : state_) word = sm.next();
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  std::uint64_t operator()() { return next(); }

  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~0ull; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Xoshiro256pp& rng) {
  return static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

/// Uniform double in [lo, hi).
inline double uniform(Xoshiro256pp& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Standard normal variate via Box-Muller. Stateless: draws two uniforms and
/// returns one variate, which keeps call sites reproducible without a cache.
inline double standard_normal(Xoshiro256pp& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);  // log(0) guard
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(6.283185307179586476925286766559 * u2);
}

/// Derives the seed of a named sub-stream: the root seed is mixed with a
/// hash of the label bytes through splitmix64.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a over the label
  for (const char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  SplitMix64 sm(seed ^ h);
  return sm.next();
}

/// Derives the seed of the `index`-th sub-stream of `seed`. Random access:
/// stream i can be derived without deriving streams 0..i-1.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  SplitMix64 sm(seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
  return sm.next();
}

}  // namespace kdx
