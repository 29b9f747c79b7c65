#pragma once
// Portable draws from a seeded 64-bit Mersenne Twister. The standard
// distributions are implementation-defined, so outputs would differ between
// standard libraries; these keep datasets byte-identical everywhere.

#include <cstdint>
#include <random>

namespace tohfb {

using Rng = std::mt19937_64;

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform on [0, n); n must be positive.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = Rng::max() - Rng::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return x % n;
}

}  // namespace tohfb
