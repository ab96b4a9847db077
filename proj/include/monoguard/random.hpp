#ifndef MONOGUARD_RANDOM_HPP_
#define MONOGUARD_RANDOM_HPP_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace monoguard {

// The standard distributions are implementation-defined; these helpers give
// the same streams on every platform for a given seed.
using Rng = std::mt19937_64;

// Uniform in [0, 1).
inline double UniformUnit(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double UniformReal(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * UniformUnit(rng);
}

// Uniform in [0, n) by rejection.
inline std::uint64_t UniformIndex(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

template <typename T>
void Shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[UniformIndex(rng, i)]);
  }
}

}  // namespace monoguard

#endif  // MONOGUARD_RANDOM_HPP_
