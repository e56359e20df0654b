#pragma once

#include <cstdint>
#include <random>

namespace graftforest {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: the same (parent, stream) pair always yields the
/// same child, and distinct streams are decorrelated.
inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t stream) {
  return splitmix64(splitmix64(parent) ^ (stream * 0xD6E8FEB86659FD93ULL + 0x2545F4914F6CDD1DULL));
}

/// Stream tags used when deriving per-tree randomness from a tree seed.
enum class SeedStream : std::uint64_t {
  resample = 1,
  cart = 2,
  scion = 3,
};

inline std::uint64_t derive_seed(std::uint64_t parent, SeedStream stream) {
  return derive_seed(parent, static_cast<std::uint64_t>(stream));
}

}  // namespace graftforest
