#pragma once

// Seeded self-check of the kernel identities, used by `rellandau verify`.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace rellandau::verify {

struct CheckResult {
  std::string name;
  std::size_t n = 0;          // pairs examined
  double max_residual = 0.0;  // normalized as described per check
  double tolerance = 0.0;
  bool pass = false;
};

/// Runs every check on `pairs` independent pairs with |p|, |q| <= 10 and
/// `near_pairs` pairs with |p - q| in [1e-4, 1e-2]. Throws ConfigError if
/// pairs == 0.
std::vector<CheckResult> run_kernel_checks(std::size_t pairs, std::size_t near_pairs,
                                           std::uint64_t seed);

}  // namespace rellandau::verify
