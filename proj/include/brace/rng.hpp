#pragma once

#include <cstdint>
#include <random>

namespace brace {

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based stream key: the same (seed, task) always yields the same
// stream, independent of scheduling order.
constexpr std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t task) {
  return mix64(mix64(seed) ^ mix64(task + 0x632be59bd9b4e019ULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t task = 0) { return Rng(stream_seed(seed, task)); }

// Uniform in [0,1) built from raw engine bits so results do not depend on
// the standard library's distribution implementations.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

}  // namespace brace
