#pragma once

#include <cstdint>

namespace heis {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream: the k-th draw depends only on (seed, k), so any
/// partition of the draws across threads gives the same numbers.
struct CounterRng {
  std::uint64_t seed = 0;

  std::uint64_t bits(std::uint64_t counter) const { return splitmix64(splitmix64(seed) ^ splitmix64(counter * 0xd1342543de82ef95ULL + 1)); }
  /// Uniform on [0, 1).
  double uniform(std::uint64_t counter) const { return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53; }
  /// Uniform on (0, 1].
  double uniform_open0(std::uint64_t counter) const { return 1.0 - uniform(counter); }
};

}  // namespace heis
