// ============================================================================
// rng.hpp - seeded random streams
//
// Every stochastic component draws from an explicitly seeded stream derived
// here, so any run is reproducible from (seed, config) alone.
// ============================================================================

#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace rhexis {

// SplitMix64 finalizer; used to derive independent stream seeds.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_str(const std::string& s) {
  // FNV-1a 64
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

// Derive a child seed from a parent seed and a label, e.g. per-video streams.
inline std::uint64_t derive_seed(std::uint64_t parent, const std::string& label) {
  return mix64(parent ^ hash_str(label));
}
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
  return mix64(parent ^ mix64(index));
}
inline std::uint64_t derive_seed(std::uint64_t parent, const std::string& label,
                                 std::uint64_t index) {
  return derive_seed(derive_seed(parent, label), index);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline double gaussian(Rng& rng, double mean = 0.0, double sigma = 1.0) {
  return std::normal_distribution<double>(mean, sigma)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {  // inclusive bounds
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace rhexis
