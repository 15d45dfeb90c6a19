#pragma once

#include <bit>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qksvm {

// All randomized operations in this library draw from std::mt19937_64 seeded
// directly with a user-supplied 64-bit seed. Bounded draws use top-bits
// rejection sampling and shuffles use the Fisher-Yates walk below, so every
// plan is reproducible bit-for-bit across platforms and standard libraries.
using Rng = std::mt19937_64;

inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: n must be positive");
  if (n == 1) return 0;
  const int bits = 64 - std::countl_zero(n - 1);
  for (;;) {
    const std::uint64_t r = rng() >> (64 - bits);
    if (r < n) return r;
  }
}

template <typename T>
void shuffle_in_place(Rng& rng, std::vector<T>& items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

// Uniform double in [lo, hi) from 53 random bits.
inline double uniform_real(Rng& rng, double lo, double hi) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + u * (hi - lo);
}

}  // namespace qksvm
