#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace hssc {

/// All randomness in the project flows from one base seed, split into named
/// sub-streams (init, shuffle, dropout, synthetic) so that changing how one
/// stream is consumed never perturbs the others.
inline std::uint64_t substream_seed(std::uint64_t base_seed, std::string_view name) {
  // FNV-1a over the name, folded with the base seed and a splitmix64 finalizer.
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : name) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::uint64_t z = base_seed + 0x9e3779b97f4a7c15ull * (h | 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 substream(std::uint64_t base_seed, std::string_view name) {
  return std::mt19937_64(substream_seed(base_seed, name));
}

}  // namespace hssc
