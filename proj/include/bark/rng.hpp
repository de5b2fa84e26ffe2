#pragma once

#include <cstdint>
#include <random>

namespace bark {

using Rng = std::mt19937_64;

// Every random consumer derives its generator from a master seed plus fixed
// integer tags (chain index, fit index, ...), so parallel work and repeated
// runs with the same seed agree exactly.
inline Rng make_rng(std::uint64_t seed, std::uint64_t tag0 = 0,
                    std::uint64_t tag1 = 0, std::uint64_t tag2 = 0) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
      static_cast<std::uint32_t>(tag0), static_cast<std::uint32_t>(tag0 >> 32),
      static_cast<std::uint32_t>(tag1), static_cast<std::uint32_t>(tag1 >> 32),
      static_cast<std::uint32_t>(tag2), static_cast<std::uint32_t>(tag2 >> 32)};
  return Rng(seq);
}

// splitmix64 mix of a seed and a tag; used where a derived 64-bit seed (not
// a generator) is needed, e.g. one seed per BO fit.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (tag + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline long long uniform_int(Rng& rng, long long lo, long long hi) {
  return std::uniform_int_distribution<long long>(lo, hi)(rng);
}

inline double normal(Rng& rng, double mean = 0.0, double sd = 1.0) {
  return std::normal_distribution<double>(mean, sd)(rng);
}

}  // namespace bark
