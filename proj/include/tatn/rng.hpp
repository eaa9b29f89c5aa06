#ifndef TATN_RNG_HPP
#define TATN_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace tatn {

// All randomness in the toolkit flows from one user seed through named
// sub-streams ("init", "batching", ...), so components can be pinned and
// tested independently of each other.
inline std::uint64_t sub_seed(std::uint64_t seed, std::string_view stream) {
  // FNV-1a over the stream name, folded into the seed, then a splitmix64
  // finalizer so nearby seeds do not produce correlated streams.
  std::uint64_t h = 1469598103934665603ull;
  for (char c : stream) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream) {
  return std::mt19937_64(sub_seed(seed, stream));
}

}  // namespace tatn

#endif
