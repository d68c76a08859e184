#pragma once

// Region splitting, the Psi/Theta functions, pointwise bound functions for
// B and Sigma, and empirical surveys of the bound constants.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "rellandau/types.hpp"

namespace rellandau::estimates {

enum class Region { A, Ac };

/// A iff sqrt(p0 q0) >= |p - q|.
Region region(const Momentum& p, const Momentum& q);
inline bool in_region_a(const Momentum& p, const Momentum& q) { return region(p, q) == Region::A; }

/// Psi(x) = x (1 - log x) on [0, 1], x above 1. Throws std::domain_error for x < 0.
double psi(double x);
/// Theta(x) = x (1 - log x) on [0, 1/2], x log 2 + 1/2 above.
double theta(double x);
/// Integral of 1/Psi over [a, b] in closed form; +inf when a = 0 < b.
double psi_integral(double a, double b);

/// min(p0, q0) |p-q|^-2 on A, 1 on Ac.
double phi_b1(const Momentum& p, const Momentum& q);
/// (q0)^3 |p-q|^-3 on A, 1 on Ac.
double phi_b2(const Momentum& p, const Momentum& q);
/// min(p0, q0)^3 |p-q|^-1 on A, min(p0, q0)^2 on Ac.
double phi_sigma1(const Momentum& p, const Momentum& q);
/// min(p0, q0)^7 |p-q|^-3 on A, (q0)^5 on Ac.
double phi_sigma2(const Momentum& p, const Momentum& q);

enum class BoundId { Lambda, PhiNorm, BNorm, BDiff, SigmaDiffTrivial, SigmaDiffLipschitz };
enum class IntegralId { Lem41I, Lem41IV, Prop42Sigma, Prop42B, Prop43 };
enum class DensityId { Juttner, TruncatedGaussian };

/// Throw ConfigError on unknown names.
BoundId parse_bound_id(std::string_view name);
IntegralId parse_integral_id(std::string_view name);
DensityId parse_density_id(std::string_view name);
std::string_view name(BoundId id);
std::string_view name(IntegralId id);
std::string_view name(DensityId id);
const std::vector<BoundId>& all_bound_ids();
const std::vector<IntegralId>& all_integral_ids();

struct BoundReport {
  std::string bound_id;
  std::size_t n_samples = 0;
  double max_ratio = 0.0;
  std::vector<Momentum> argmax;  // (p, q) or (p, q, p~, q~); empty when n = 0
  std::string sampler_spec;
  std::size_t n_noisy = 0;  // Monte Carlo samples whose relative stderr exceeded 10%
};

/// Sup of LHS/RHS over n sampled tuples. Sample i depends only on
/// (seed, i), so the result is independent of thread count and max_ratio is
/// non-decreasing in n.
BoundReport bound_survey(BoundId id, std::size_t n, std::uint64_t seed);

/// Options for the integral surveys.
struct IntegralOptions {
  std::size_t inner_samples = 256;  // Monte Carlo points per outer sample
  double alpha = -1.0;              // exponent for lem41_I
};

BoundReport integral_survey(IntegralId id, DensityId density, std::size_t n, std::uint64_t seed,
                            const IntegralOptions& options = {});

/// Header matching write_csv_row: bound_id,n_samples,max_ratio,p_x,...,qt_z
std::string csv_header();
void write_csv_row(std::ostream& os, const BoundReport& report);

}  // namespace rellandau::estimates
