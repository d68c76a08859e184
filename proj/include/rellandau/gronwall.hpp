#pragma once

// Psi-Gronwall comparison: forward integration of rho' = gamma(t) Psi(rho)
// and inversion of the integral bound int_{rho0}^{rho} dy / Psi(y) = G.
// rho here is the Wasserstein bound, unrelated to kernel::rho.

#include <iosfwd>
#include <vector>

namespace rellandau::gronwall {

struct Problem {
  double rho0 = 0.0;
  /// Piecewise-constant weight on equal subintervals of [0, T].
  std::vector<double> gamma;
  double T = 1.0;
  double dt = 1e-3;

  /// Throws ConfigError on rho0 < 0, empty or negative gamma, dt <= 0 or dt > T.
  void validate() const;
};

struct Point {
  double t;
  double rho;
};

/// Classical RK4 with step min(dt, T / ceil(T / dt)) ending exactly at T.
/// Throws NumericError if dt * max(gamma) > 1.
std::vector<Point> integrate(const Problem& problem);

/// rho with psi_integral(rho0, rho) = gamma_integral, by bisection. The
/// upper end of the final bracket is returned, so the result never
/// undershoots.
/// rho0 = 0 gives 0. Throws std::domain_error on negative arguments.
double invert_bound(double rho0, double gamma_integral);

/// Header t,rho.
void write_csv(std::ostream& os, const std::vector<Point>& trajectory);

}  // namespace rellandau::gronwall
