#pragma once

#include <cstdint>
#include <random>

namespace pcinf {

using Rng = std::mt19937_64;

inline constexpr std::uint64_t kDefaultSeed = 20220101;

// splitmix64 finaliser; used to derive independent child seeds so that work
// items can be evaluated in any order (or in parallel) with identical output.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ (index * 0xd6e8feb86659fd93ULL + 0x632be59bd9b4e019ULL));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

}  // namespace pcinf
