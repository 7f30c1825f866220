#pragma once

#include <cstdint>
#include <random>

namespace tailcal {

/// SplitMix64 finalizer. Used to derive independent substream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed of the `index`-th substream of `master`. Stable across platforms
/// and independent of the order in which substreams are consumed.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

/// Seeded generator with platform-stable draws.
///
/// The standard distributions leave their algorithms unspecified, so the
/// draws here are built directly on the raw 64-bit engine output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01();

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);

  /// Uniform integer on the closed range [lo, hi], rejection sampled.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// Standard normal (Box-Muller, one draw per call, no caching).
  double normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace tailcal
