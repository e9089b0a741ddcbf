#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace sfae {

// 53-bit uniform draw in [0, 1). Derived directly from the mt19937 word
// stream so that generated data is identical across standard library
// implementations, which std::uniform_real_distribution does not guarantee.
inline double uniform01(std::mt19937& rng) {
  const std::uint64_t hi = rng() >> 5;  // 27 bits
  const std::uint64_t lo = rng() >> 6;  // 26 bits
  return (static_cast<double>(hi) * 67108864.0 + static_cast<double>(lo)) *
         (1.0 / 9007199254740992.0);
}

inline double uniform_range(std::mt19937& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Unbiased integer draw in [0, n) by rejection. n must be in [1, 2^32].
inline std::size_t uniform_index(std::mt19937& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  const std::uint64_t span = 1ull << 32;
  const std::uint64_t limit = span - span % n;
  for (;;) {
    const std::uint64_t r = rng();
    if (r < limit) return static_cast<std::size_t>(r % n);
  }
}

}  // namespace sfae
