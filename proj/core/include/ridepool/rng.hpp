#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ridepool {

using Rng = std::mt19937_64;

/// Independent generator for a named consumer ("demand", "acceptance", ...)
/// derived from the root seed. The same (seed, name) pair always yields the
/// same stream.
inline Rng substream(std::uint64_t seed, std::string_view name) {
  // FNV-1a over the name keeps the mapping stable across platforms.
  std::uint64_t h = 1469598103934665603ULL;
  for (const char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
  return Rng(seq);
}

/// Uniform draw in [0, 1) built from the top 53 bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace ridepool
