#pragma once

#include <cstdint>

namespace gsieve {

// Counter-based RNG. Every draw is a pure function of (master seed, stream,
// counter), so sample streams are reproducible under any partition of work
// across threads. The mixer is the SplitMix64 finalizer, applied twice.

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ull;

constexpr uint64_t splitmix64(uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// One uniform 64-bit draw for (seed, stream, counter).
constexpr uint64_t counter_rand(uint64_t seed, uint64_t stream, uint64_t counter) {
  uint64_t key = splitmix64(seed ^ splitmix64(stream + 1));
  return splitmix64(key + counter * kGolden);
}

/// Map a uniform 64-bit value onto [0, n) without modulo bias (Lemire reduction).
constexpr uint32_t uniform_index(uint64_t r, uint32_t n) {
  return static_cast<uint32_t>((static_cast<unsigned __int128>(r) * n) >> 64);
}

/// Uniform double in [0, 1) from a 64-bit draw (53 mantissa bits).
constexpr double uniform_double(uint64_t r) {
  return static_cast<double>(r >> 11) * 0x1.0p-53;
}

}  // namespace gsieve
