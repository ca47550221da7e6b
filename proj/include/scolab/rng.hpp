#pragma once

#include <cstdint>
#include <random>

namespace scolab {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream keys are hashed, never offset, so (seed, i, tag) streams do not
// overlap across neighbouring trial indices.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                                 std::uint64_t tag = 0) {
  return splitmix64(splitmix64(splitmix64(master) ^ index) ^ (tag * 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t master, std::uint64_t index, std::uint64_t tag = 0) {
  return Rng(derive_seed(master, index, tag));
}

// Stream tags used across the harness.
enum StreamTag : std::uint64_t {
  kTagCode = 1,
  kTagSample = 2,
  kTagProbe = 3,
  kTagQuery = 4,
};

}  // namespace scolab
