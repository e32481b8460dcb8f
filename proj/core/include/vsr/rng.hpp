#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vsr {

using Rng = std::mt19937_64;

// splitmix64 step; cheap, well-mixed, good enough to decorrelate seed streams.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive an independent seed for a named sub-stream of `base`.
/// Different streams of the same base never collide in practice; the same
/// (base, stream) pair always yields the same seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(base ^ splitmix64(stream ^ 0x51ed270b4c4b2545ULL));
}

/// FNV-1a over a string, for deriving stable per-name seed streams.
constexpr std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

} // namespace vsr
