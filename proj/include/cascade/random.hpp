#pragma once

#include <cstdint>
#include <random>

namespace cascade {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for one stage of a seeded run.
inline std::mt19937_64 child_rng(std::uint64_t seed, std::uint64_t stage) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stage + 1)));
}

}  // namespace cascade
