#pragma once

// Counter-based random streams (Philox4x32-10). A stream is fully determined
// by (seed, domain, substream), so any draw can be reproduced without
// replaying earlier draws and results do not depend on thread scheduling.

#include <array>
#include <cstdint>
#include <optional>

#include "rellandau/types.hpp"

namespace rellandau::rng {

using Block = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// One Philox4x32 bijection with 10 rounds.
Block philox4x32_10(Block counter, Key key);

/// Tags keeping streams for different purposes disjoint.
enum class Domain : std::uint32_t {
  Generic = 0,
  Juttner = 1,
  SdeNoise = 2,
  SdePairNoise = 3,
  Survey = 4,
  Subsample = 5,
  Reference = 6,
  Density = 7,
  Permutation = 8,
};

/// Packs two 32-bit indices (e.g. step and particle) into a substream id.
constexpr std::uint64_t substream(std::uint32_t hi, std::uint32_t lo) {
  return (static_cast<std::uint64_t>(hi) << 32) | lo;
}

class Stream {
 public:
  Stream(std::uint64_t seed, Domain domain, std::uint64_t substream);

  std::uint32_t next_u32();
  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n), unbiased. n must be > 0.
  std::uint64_t uniform_index(std::uint64_t n);
  /// Standard normal (Box-Muller, pairs cached).
  double normal();
  Vec3 normal3() {
    const double a = normal();
    const double b = normal();
    const double c = normal();
    return {a, b, c};
  }
  /// Uniformly distributed unit vector.
  Vec3 unit_vector();

  /// Number of 128-bit blocks consumed so far.
  std::uint32_t blocks_used() const { return counter_[0]; }

 private:
  void refill();

  Block counter_{};
  Key key_{};
  Block buffer_{};
  int pos_ = 4;
  std::optional<double> cached_normal_;
};

}  // namespace rellandau::rng
