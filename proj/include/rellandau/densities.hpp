#pragma once

// Isotropic reference densities on R^3 used by the integral surveys.

#include "rellandau/estimates.hpp"
#include "rellandau/random.hpp"
#include "rellandau/types.hpp"

namespace rellandau::densities {

class RadialDensity {
 public:
  /// exp(-p0) / (4 pi K2(1)).
  static RadialDensity juttner();
  /// Standard Gaussian restricted to |p| <= cutoff, renormalized.
  static RadialDensity truncated_gaussian(double cutoff = 6.0);
  static RadialDensity make(estimates::DensityId id);

  estimates::DensityId id() const { return id_; }

  /// Density at any point with |p| = r.
  double at_radius(double r) const;
  double operator()(const Vec3& p) const { return at_radius(norm(p)); }
  /// L-infinity norm (the value at the origin).
  double sup() const { return at_radius(0.0); }

  /// G(s) = integral_0^s g(u) u du.
  double radial_moment(double s) const;
  /// Average of g over the sphere of radius r centred at a point with |p| = a.
  double sphere_average(double a, double r) const;

  Vec3 sample(rng::Stream& s) const;

 private:
  RadialDensity(estimates::DensityId id, double norm, double cutoff)
      : id_(id), norm_(norm), cutoff_(cutoff) {}

  estimates::DensityId id_;
  double norm_;    // multiplies the unnormalized profile
  double cutoff_;  // support radius, infinite for Juttner
};

}  // namespace rellandau::densities
