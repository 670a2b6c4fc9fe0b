#pragma once

#include <cstdint>
#include <random>

namespace lpblocks {

/// Identifies one random stream. Streams are derived, never advanced in
/// sequence, so replication r can be generated without touching r - 1.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_id = 0;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

using Engine = std::mt19937_64;

// SplitMix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(SeedSpec s) noexcept {
  return splitmix64(splitmix64(s.master_seed) ^ splitmix64(s.stream_id + 0x632be59bd9b4e019ULL));
}

/// Child stream for sub-task `index` of a stream (replication, worker, ...).
constexpr SeedSpec derive(SeedSpec parent, std::uint64_t index) noexcept {
  return SeedSpec{stream_seed(parent), index};
}

inline Engine make_engine(SeedSpec s) { return Engine(stream_seed(s)); }

// Uniform on (0, 1].
inline double uniform_open0(Engine& eng) {
  constexpr double scale = 1.0 / 9007199254740992.0;  // 2^-53
  return (static_cast<double>(eng() >> 11) + 1.0) * scale;
}

}  // namespace lpblocks
