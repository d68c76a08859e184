#include "rellandau/gronwall.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rellandau/errors.hpp"
#include "rellandau/estimates.hpp"

namespace rellandau::gronwall {

void Problem::validate() const {
  if (!(rho0 >= 0.0) || !std::isfinite(rho0)) throw ConfigError("gronwall: rho0 must be >= 0");
  if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("gronwall: T must be > 0");
  if (!(dt > 0.0) || dt > T) throw ConfigError("gronwall: need 0 < dt <= T");
  if (gamma.empty()) throw ConfigError("gronwall: gamma must be non-empty");
  for (double g : gamma)
    if (!(g >= 0.0) || !std::isfinite(g)) throw ConfigError("gronwall: gamma entries must be >= 0");
}

std::vector<Point> integrate(const Problem& pb) {
  pb.validate();
  const double gmax = *std::max_element(pb.gamma.begin(), pb.gamma.end());
  // Psi' <= 1 at and above rho0 + 1 >= 1.
  if (pb.dt * gmax > 1.0) throw NumericError("gronwall: dt * max(gamma) exceeds 1");

  const auto steps = static_cast<std::size_t>(std::ceil(pb.T / pb.dt - 1e-9));
  const double h = pb.T / double(steps);
  const double seg = pb.T / double(pb.gamma.size());
  auto gamma_at = [&](double t) {
    const auto k = static_cast<std::size_t>(t / seg);
    return pb.gamma[std::min(k, pb.gamma.size() - 1)];
  };
  auto f = [](double g, double x) { return g * estimates::psi(std::max(x, 0.0)); };

  std::vector<Point> out;
  out.reserve(steps + 1);
  double rho = pb.rho0;
  out.push_back({0.0, rho});
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = double(n) * h;
    const double g = gamma_at(t + 0.5 * h);
    const double k1 = f(g, rho);
    const double k2 = f(g, rho + 0.5 * h * k1);
    const double k3 = f(g, rho + 0.5 * h * k2);
    const double k4 = f(g, rho + h * k3);
    rho += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.push_back({n + 1 == steps ? pb.T : double(n + 1) * h, rho});
  }
  return out;
}

double invert_bound(double rho0, double gamma_integral) {
  if (!(rho0 >= 0.0) || !(gamma_integral >= 0.0))
    throw std::domain_error("invert_bound: arguments must be >= 0");
  if (rho0 == 0.0 || gamma_integral == 0.0) return rho0;
  if (std::isinf(gamma_integral)) return gamma_integral;

  double lo = rho0;
  double hi = std::max(1.0, 2.0 * rho0);
  while (estimates::psi_integral(rho0, hi) < gamma_integral) {
    lo = hi;
    hi *= 2.0;
    if (!std::isfinite(hi)) return hi;
  }
  // Bisect in log space: the solution may sit many decades above rho0.
  for (int it = 0; it < 200 && hi > lo * (1.0 + 4 * std::numeric_limits<double>::epsilon());
       ++it) {
    const double mid = std::sqrt(lo) * std::sqrt(hi);
    if (mid <= lo || mid >= hi) break;
    if (estimates::psi_integral(rho0, mid) < gamma_integral)
      lo = mid;
    else
      hi = mid;
  }
  return hi;
}

void write_csv(std::ostream& os, const std::vector<Point>& trajectory) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "t,rho\n";
  for (const auto& p : trajectory) os << p.t << ',' << p.rho << '\n';
  os.precision(old);
}

}  // namespace rellandau::gronwall
