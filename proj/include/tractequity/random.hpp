#pragma once

#include <cstdint>
#include <string_view>

#include "tractequity/io.hpp"

namespace tractequity {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stateless draw keyed by (seed, home, work, index): the value depends only
/// on the key, never on the order in which keys are visited.
inline double counter_uniform(std::uint64_t seed, std::string_view home, std::string_view work,
                              std::uint64_t index) {
  std::uint64_t k = mix64(seed);
  k = mix64(k ^ fnv1a64(home));
  k = mix64(k ^ fnv1a64(work));
  k = mix64(k ^ index);
  return static_cast<double>(k >> 11) * 0x1.0p-53;
}

}  // namespace tractequity
