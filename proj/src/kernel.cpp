#include "rellandau/kernel.hpp"

#include <cmath>

#include "rellandau/errors.hpp"

namespace rellandau::kernel {

namespace {

void check_eps(double eps_reg) {
  if (!(eps_reg >= 0.0) || !std::isfinite(eps_reg))
    throw ConfigError("eps_reg must be finite and >= 0");
}

/// Regularized rho; throws on an unregularized coincident pair.
double regularized_rho(const Momentum& p, const Momentum& q, double eps_reg) {
  check_eps(eps_reg);
  const double r = rho(p, q);
  if (eps_reg == 0.0 && r == 0.0) throw SingularPair("kernel evaluated at a coincident pair");
  return r + eps_reg;
}

/// (p3, p2, p1)
Vec3 reversed(const Vec3& p) { return {p.z, p.y, p.x}; }

}  // namespace

double rho(const Momentum& p, const Momentum& q) {
  return rho_from(p.vec(), p.energy(), q.vec(), q.energy());
}

double rho_difference_form(const Momentum& p, const Momentum& q) {
  return p.energy() * q.energy() - dot(p.vec(), q.vec()) - 1.0;
}

double rho_half_difference_form(const Momentum& p, const Momentum& q) {
  const double de = p.energy() - q.energy();
  return 0.5 * (norm_sq(p.vec() - q.vec()) - de * de);
}

KernelScalars scalars(const Momentum& p, const Momentum& q, double eps_reg) {
  KernelScalars k;
  k.rho = regularized_rho(p, q, eps_reg);
  k.tau = k.rho + 2.0;
  const double rt = k.rho * k.tau;
  k.lambda = (k.rho + 1.0) * (k.rho + 1.0) / (p.energy() * q.energy() * rt * std::sqrt(rt));
  return k;
}

double lambda(const Momentum& p, const Momentum& q, double eps_reg) {
  return scalars(p, q, eps_reg).lambda;
}

Mat3 s_matrix(const Momentum& p, const Momentum& q) {
  const double r = rho(p, q);
  const Vec3 d = p.vec() - q.vec();
  Mat3 s = Mat3::identity() * (r * (r + 2.0));
  s -= Mat3::outer(d, d);
  s += r * (Mat3::outer(p.vec(), q.vec()) + Mat3::outer(q.vec(), p.vec()));
  return s;
}

Vec3 v1(const Momentum& p, const Momentum& q) {
  // q0 p - p0 q = ((p0 + q0) (p - q) - (p0 - q0) (p + q)) / 2 with
  // p0 - q0 = (p - q).(p + q) / (p0 + q0).
  const Vec3 d = p.vec() - q.vec();
  const Vec3 s = p.vec() + q.vec();
  const double e = p.energy() + q.energy();
  const double de = dot(d, s) / e;
  return 0.5 * (e * d - de * s);
}

Vec3 cross_pq(const Momentum& p, const Momentum& q) {
  return 0.5 * cross(p.vec() - q.vec(), p.vec() + q.vec());
}

Mat3 pi1(const Momentum& p, const Momentum& q) {
  const Vec3 v = v1(p, q);
  return Mat3::identity() * norm_sq(v) - Mat3::outer(v, v);
}

Mat3 pi2(const Momentum& p, const Momentum& q) {
  const Vec3 w = cross_pq(p, q);
  return Mat3::outer(w, w);
}

Mat3 sigma_pi1(const Momentum& p, const Momentum& q) {
  const Vec3 v = v1(p, q);
  Mat3 m;
  m(0, 0) = v.y;
  m(0, 1) = -v.z;
  m(1, 0) = -v.x;
  m(1, 2) = v.z;
  m(2, 1) = v.x;
  m(2, 2) = -v.y;
  return m;
}

Mat3 sigma_pi2(const Momentum& p, const Momentum& q) {
  const double np = norm(p.vec());
  if (np == 0.0) return Mat3::zero();
  return Mat3::outer(cross_pq(p, q), reversed(p.vec())) * (1.0 / np);
}

Mat3 sigma_s(const Momentum& p, const Momentum& q) {
  return sigma_pi1(p, q) -
         Mat3::outer(cross_pq(p, q), reversed(p.vec())) * (1.0 / (p.energy() + 1.0));
}

Mat3 sigma(const Momentum& p, const Momentum& q, double eps_reg) {
  const double r = regularized_rho(p, q, eps_reg);
  const double rt = r * (r + 2.0);
  const double factor = (r + 1.0) / std::sqrt(p.energy() * q.energy()) / std::pow(rt, 0.75);
  return sigma_s(p, q) * factor;
}

Mat3 phi(const Momentum& p, const Momentum& q, double eps_reg) {
  return s_matrix(p, q) * lambda(p, q, eps_reg);
}

Vec3 drift_b(const Momentum& p, const Momentum& q, double eps_reg) {
  const KernelScalars k = scalars(p, q, eps_reg);
  const double f = k.lambda * (k.rho + 2.0);
  const Vec3& a = p.vec();
  const Vec3& b = q.vec();
  return {f * (b.x - a.x), f * (b.y - a.y), f * (b.z - a.z)};
}

Vec3 div_p_phi(const Momentum& p, const Momentum& q) {
  const KernelScalars k = scalars(p, q, 0.0);
  return 2.0 * k.lambda * ((k.rho + 1.0) * q.vec() - p.vec());
}

Vec3 div_q_phi(const Momentum& p, const Momentum& q) {
  const KernelScalars k = scalars(p, q, 0.0);
  return 2.0 * k.lambda * ((k.rho + 1.0) * p.vec() - q.vec());
}

double generator(const Momentum& p, const Momentum& q, const Vec3& grad, const Mat3& hess,
                 double eps_reg) {
  return 0.5 * frobenius_dot(phi(p, q, eps_reg), hess) + dot(drift_b(p, q, eps_reg), grad);
}

}  // namespace rellandau::kernel
