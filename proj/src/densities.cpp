#include "rellandau/densities.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "rellandau/errors.hpp"
#include "rellandau/transport.hpp"

namespace rellandau::densities {

using estimates::DensityId;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// (eps + 1) exp(-eps) at eps = sqrt(1 + s^2), the Juttner tail beyond s up to norm.
double juttner_tail(double s) {
  const double e = std::sqrt(1.0 + s * s);
  return (e + 1.0) * std::exp(-e);
}

}  // namespace

RadialDensity RadialDensity::juttner() {
  return {DensityId::Juttner, 1.0 / (4.0 * std::numbers::pi * transport::juttner_normalization()),
          kInf};
}

RadialDensity RadialDensity::truncated_gaussian(double cutoff) {
  if (!(cutoff > 0.0)) throw ConfigError("truncated_gaussian: cutoff must be positive");
  // P(|X| <= c) for a standard Gaussian in R^3.
  const double mass = std::erf(cutoff / std::numbers::sqrt2) -
                      std::sqrt(2.0 / std::numbers::pi) * cutoff * std::exp(-0.5 * cutoff * cutoff);
  return {DensityId::TruncatedGaussian, 1.0 / (std::pow(2.0 * std::numbers::pi, 1.5) * mass),
          cutoff};
}

RadialDensity RadialDensity::make(DensityId id) {
  return id == DensityId::Juttner ? juttner() : truncated_gaussian();
}

double RadialDensity::at_radius(double r) const {
  if (id_ == DensityId::Juttner) return norm_ * std::exp(-std::sqrt(1.0 + r * r));
  return r <= cutoff_ ? norm_ * std::exp(-0.5 * r * r) : 0.0;
}

double RadialDensity::radial_moment(double s) const {
  if (id_ == DensityId::Juttner) {
    // tail(1) - tail(e) with tail(e) / tail(1) = (1 + de/2) exp(-de), de = e - 1.
    const double de = s * s / (1.0 + std::sqrt(1.0 + s * s));
    return norm_ * juttner_tail(0.0) * -std::expm1(std::log1p(0.5 * de) - de);
  }
  const double t = std::min(s, cutoff_);
  return -norm_ * std::expm1(-0.5 * t * t);
}

double RadialDensity::sphere_average(double a, double r) const {
  if (a == 0.0 || r == 0.0) return at_radius(a + r);
  const double lo = std::abs(a - r);
  const double hi = a + r;
  // (G(hi) - G(lo)) / (2 a r), written as a tail difference so that neither
  // small r nor a far-out sphere loses relative accuracy.
  double diff;
  if (id_ == DensityId::Juttner) {
    const double el = std::sqrt(1.0 + lo * lo);
    const double eh = std::sqrt(1.0 + hi * hi);
    const double de = 4.0 * a * r / (el + eh);
    diff = norm_ * juttner_tail(lo) * -std::expm1(std::log1p(de / (el + 1.0)) - de);
  } else {
    if (lo >= cutoff_) return 0.0;
    const double h = std::min(hi, cutoff_);
    diff = norm_ * std::exp(-0.5 * lo * lo) * -std::expm1(-0.5 * (h - lo) * (h + lo));
  }
  return diff / (2.0 * a * r);
}

Vec3 RadialDensity::sample(rng::Stream& s) const {
  if (id_ == DensityId::Juttner) return transport::sample_juttner_one(s);
  for (;;) {
    const Vec3 v = s.normal3();
    if (norm_sq(v) <= cutoff_ * cutoff_) return v;
  }
}

}  // namespace rellandau::densities
