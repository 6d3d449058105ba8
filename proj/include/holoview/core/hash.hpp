#pragma once

#include <cstdint>
#include <span>

namespace holoview {

// FNV-1a 64. The browser viewer computes the same hash for conformance vectors.
inline std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes,
                             std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace holoview
