#include "rellandau/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rellandau/errors.hpp"
#include "rellandau/estimates.hpp"
#include "rellandau/kernel.hpp"
#include "rellandau/linalg.hpp"
#include "rellandau/random.hpp"

namespace rellandau::verify {

namespace {

using namespace kernel;

struct Pair {
  Momentum p, q;
};

Momentum in_ball(rng::Stream& s, double r) {
  return Momentum((r * std::cbrt(s.uniform())) * s.unit_vector());
}

std::vector<Pair> make_pairs(std::size_t pairs, std::size_t near, std::uint64_t seed) {
  std::vector<Pair> out;
  out.reserve(pairs + near);
  for (std::size_t i = 0; i < pairs; ++i) {
    rng::Stream s(seed, rng::Domain::Generic, i);
    const Momentum p = in_ball(s, 10.0);
    out.push_back({p, in_ball(s, 10.0)});
  }
  for (std::size_t i = 0; i < near; ++i) {
    rng::Stream s(seed, rng::Domain::Generic, rng::substream(1, static_cast<std::uint32_t>(i)));
    const Momentum p = in_ball(s, 10.0);
    const double sep = 1e-4 * std::pow(100.0, s.uniform());
    out.push_back({p, Momentum(p.vec() + sep * s.unit_vector())});
  }
  return out;
}

Vec3 fd_div(const Momentum& p, const Momentum& q, bool wrt_p) {
  const Momentum& x = wrt_p ? p : q;
  const double h = 1e-5 * (1.0 + norm(x.vec()));
  Vec3 out;
  for (std::size_t j = 0; j < 3; ++j) {
    Vec3 e;
    e[j] = h;
    const Momentum xp(x.vec() + e), xm(x.vec() - e);
    const Mat3 fp = wrt_p ? phi(xp, q, 0.0) : phi(p, xp, 0.0);
    const Mat3 fm = wrt_p ? phi(xm, q, 0.0) : phi(p, xm, 0.0);
    for (std::size_t i = 0; i < 3; ++i) out[i] += (fp(i, j) - fm(i, j)) / (2.0 * h);
  }
  return out;
}

using Residual = std::function<double(const Pair&)>;

CheckResult check(std::string name, const std::vector<Pair>& pairs, double tol, bool inclusive,
                  const Residual& f) {
  CheckResult r;
  r.name = std::move(name);
  r.tolerance = tol;
  for (const auto& pr : pairs) {
    const double v = f(pr);
    if (std::isnan(v)) continue;
    ++r.n;
    r.max_residual = std::max(r.max_residual, v);
  }
  r.pass = inclusive ? r.max_residual <= tol : r.max_residual < tol;
  return r;
}

}  // namespace

std::vector<CheckResult> run_kernel_checks(std::size_t pairs, std::size_t near,
                                           std::uint64_t seed) {
  if (pairs == 0) throw ConfigError("verify: --pairs must be positive");
  const auto all = make_pairs(pairs, near, seed);
  // Finite differences are only meaningful away from the singularity.
  std::vector<Pair> separated;
  for (std::size_t i = 0; i < std::min<std::size_t>(pairs, 1000); ++i)
    if (norm(all[i].p.vec() - all[i].q.vec()) >= 1e-2) separated.push_back(all[i]);

  std::vector<CheckResult> out;
  out.push_back(check("rho_bounds", all, 0.0, true, [](const Pair& x) {
    const double r = rho(x.p, x.q);
    const Vec3 d = x.p.vec() - x.q.vec();
    const double lo = (norm_sq(d) + norm_sq(cross_pq(x.p, x.q))) / (2 * x.p.energy() * x.q.energy());
    return (r < lo * (1 - 1e-14) || r > 0.5 * norm_sq(d) || r < 0.0) ? 1.0 : 0.0;
  }));
  out.push_back(check("region_a_energy_ratio", all, 0.0, true, [](const Pair& x) {
    if (!estimates::in_region_a(x.p, x.q)) return 0.0;
    const double a = x.p.energy(), b = x.q.energy();
    return (a > 3 * b || b > 3 * a) ? 1.0 : 0.0;
  }));
  out.push_back(check("s_projector_split", all, 1e-9, true, [](const Pair& x) {
    const Mat3 s = s_matrix(x.p, x.q), a = pi1(x.p, x.q), b = pi2(x.p, x.q);
    const double scale = std::max({s.max_abs(), a.max_abs(), b.max_abs()});
    return (s - (a - b)).max_abs() / scale;
  }));
  out.push_back(check("pi2_annihilates_p_q", all, 1e-9, true, [](const Pair& x) {
    const Mat3 b = pi2(x.p, x.q);
    const double scale = b.norm() * std::max(norm(x.p.vec()), norm(x.q.vec()));
    if (scale == 0.0) return 0.0;
    return std::max(norm(b * x.p.vec()), norm(b * x.q.vec())) / scale;
  }));
  out.push_back(check("phi_null_vector", all, 1e-9, true, [](const Pair& x) {
    const Mat3 f = phi(x.p, x.q, 0.0);
    const Vec3 u = (1.0 / x.p.energy()) * x.p.vec() - (1.0 / x.q.energy()) * x.q.vec();
    return norm(f * u) / (f.norm() * norm(u));
  }));
  out.push_back(check("phi_psd", all, 1e-9, true, [](const Pair& x) {
    const Mat3 f = phi(x.p, x.q, 0.0);
    return std::max(0.0, -linalg::min_eigenvalue(f)) / f.norm();
  }));
  out.push_back(check("sigma_square_root", all, 1e-9, true, [](const Pair& x) {
    const Mat3 f = phi(x.p, x.q, 0.0);
    return (gram(sigma(x.p, x.q, 0.0)) - f).max_abs() / f.norm();
  }));
  out.push_back(check("drift_antisymmetry", all, 0.0, true, [](const Pair& x) {
    return norm(drift_b(x.p, x.q, 0.0) + drift_b(x.q, x.p, 0.0));
  }));
  out.push_back(check("divergence_fd", separated, 1e-6, false, [](const Pair& x) {
    const Vec3 a = div_p_phi(x.p, x.q), b = div_q_phi(x.p, x.q);
    return std::max(norm(fd_div(x.p, x.q, true) - a) / norm(a),
                    norm(fd_div(x.p, x.q, false) - b) / norm(b));
  }));
  out.push_back(check("drift_half_difference", separated, 1e-6, false, [](const Pair& x) {
    const Vec3 b = drift_b(x.p, x.q, 0.0);
    const Vec3 h = 0.5 * (fd_div(x.p, x.q, true) - fd_div(x.p, x.q, false));
    return norm(h - b) / norm(b);
  }));
  out.push_back(check("energy_generator_symmetric", all, 1e-9, true, [](const Pair& x) {
    auto lp0 = [](const Momentum& p, const Momentum& q) {
      const double e = p.energy();
      const Mat3 hess =
          (Mat3::identity() - Mat3::outer(p.vec(), p.vec()) * (1.0 / (e * e))) * (1.0 / e);
      return generator(p, q, (1.0 / e) * p.vec(), hess, 0.0);
    };
    const double a = lp0(x.p, x.q), b = lp0(x.q, x.p);
    const double scale = std::abs(a) + std::abs(b);
    return scale == 0.0 ? 0.0 : std::abs(a + b) / scale;
  }));
  return out;
}

}  // namespace rellandau::verify
