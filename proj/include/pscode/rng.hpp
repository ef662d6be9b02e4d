#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

namespace pscode {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stateless per-(stream, counter) word. Used wherever results must not
// depend on execution order (Monte Carlo trials, per-worker delays).
inline std::uint64_t counter_word(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t counter) {
  std::uint64_t h = splitmix64(seed ^ 0x8b72e0f3c1a54d29ULL);
  h = splitmix64(h ^ stream);
  return splitmix64(h ^ counter);
}

// Maps a 64-bit word to [0, 1) with 53 bits of precision.
inline double unit_double(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

// Unbiased uniform draw in [0, bound) by rejection. std's
// uniform_int_distribution is implementation-defined, which would break
// the byte-identical-transcript contract across toolchains.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t lim = (0ULL - bound) % bound;  // 2^64 mod bound
  std::uint64_t v;
  do {
    v = rng();
  } while (v < lim);
  return v % bound;
}

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace pscode
