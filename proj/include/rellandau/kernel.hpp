#pragma once

// Relativistic Landau kernel algebra: relative momentum rho, the scalar
// coefficient Lambda, the matrix S and its projector split S = Pi1 - Pi2,
// the square roots sigma_S and Sigma (Sigma Sigma^T = Phi), the drift B and
// the weak-form generator L.
//
// Every operation taking eps_reg evaluates the regularized kernel in which
// rho is replaced by rho + eps_reg inside Lambda, Sigma's prefactor and the
// (rho + 2) factor of B. The matrix S itself is never regularized. With
// eps_reg = 0 a coincident pair (rho = 0) raises SingularPair.

#include "rellandau/types.hpp"

namespace rellandau::kernel {

struct KernelScalars {
  double rho = 0.0;     // regularized: rho(p, q) + eps_reg
  double tau = 2.0;     // rho + 2
  double lambda = 0.0;  // (rho + 1)^2 / (p0 q0) * (rho tau)^(-3/2)
};

/// Relative momentum via the quotient form
/// (|p-q|^2 + |p x q|^2) / (p0 q0 + p.q + 1). The result is kept inside the
/// interval [(|p-q|^2 + |p x q|^2) / (2 p0 q0), |p-q|^2 / 2] that the exact
/// value always occupies; this only moves it by rounding-level amounts.
double rho(const Momentum& p, const Momentum& q);

/// p0 q0 - p.q - 1, evaluated literally. Cancels badly near p = q; kept for
/// cross-checks.
double rho_difference_form(const Momentum& p, const Momentum& q);

/// (|p - q|^2 - (p0 - q0)^2) / 2.
double rho_half_difference_form(const Momentum& p, const Momentum& q);

KernelScalars scalars(const Momentum& p, const Momentum& q, double eps_reg);

double lambda(const Momentum& p, const Momentum& q, double eps_reg);

/// S = rho tau Id - (p-q)⊗(p-q) + rho (p⊗q + q⊗p), unregularized.
Mat3 s_matrix(const Momentum& p, const Momentum& q);

/// v1 = q0 p - p0 q, evaluated without cancellation near p = q.
Vec3 v1(const Momentum& p, const Momentum& q);
/// p x q, evaluated as (p - q) x (p + q) / 2.
Vec3 cross_pq(const Momentum& p, const Momentum& q);

/// Pi1 = |v1|^2 Id - v1⊗v1.
Mat3 pi1(const Momentum& p, const Momentum& q);
/// Pi2 = (p x q)⊗(p x q).
Mat3 pi2(const Momentum& p, const Momentum& q);

/// Square root of Pi1 built from the components of v1.
Mat3 sigma_pi1(const Momentum& p, const Momentum& q);
/// (p x q)⊗(p3, p2, p1)^T / |p|; zero at p = 0.
Mat3 sigma_pi2(const Momentum& p, const Momentum& q);
/// sigma_S = sigma_Pi1 - (p x q)⊗(p3, p2, p1)^T / (p0 + 1); sigma_S sigma_S^T = S.
Mat3 sigma_s(const Momentum& p, const Momentum& q);

/// Sigma = (rho + 1) / sqrt(p0 q0) * (rho tau)^(-3/4) * sigma_S.
Mat3 sigma(const Momentum& p, const Momentum& q, double eps_reg);

/// Phi = Lambda S.
Mat3 phi(const Momentum& p, const Momentum& q, double eps_reg);

/// B = Lambda (rho + 2) (q - p). B(p, q) = -B(q, p) bit for bit.
Vec3 drift_b(const Momentum& p, const Momentum& q, double eps_reg);

/// sum_j d/dp_j Phi^{ij} = 2 Lambda ((rho + 1) q - p), unregularized.
Vec3 div_p_phi(const Momentum& p, const Momentum& q);
/// sum_j d/dq_j Phi^{ij} = 2 Lambda ((rho + 1) p - q), unregularized.
Vec3 div_q_phi(const Momentum& p, const Momentum& q);

/// L phi(p, q) = 1/2 tr(Phi hess) + B . grad for a test function whose
/// gradient and Hessian at p are supplied by the caller.
double generator(const Momentum& p, const Momentum& q, const Vec3& grad, const Mat3& hess,
                 double eps_reg);

/// Upper triangle of a symmetric 3x3 matrix.
struct SymMat3 {
  double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;

  SymMat3& operator+=(const SymMat3& o) {
    xx += o.xx; xy += o.xy; xz += o.xz; yy += o.yy; yz += o.yz; zz += o.zz;
    return *this;
  }
  Mat3 full() const {
    Mat3 m;
    m(0, 0) = xx; m(0, 1) = m(1, 0) = xy; m(0, 2) = m(2, 0) = xz;
    m(1, 1) = yy; m(1, 2) = m(2, 1) = yz; m(2, 2) = zz;
    return m;
  }
};

struct PairCoefficients {
  SymMat3 phi;
  Vec3 drift;
};

/// Quotient-form rho on raw vectors with precomputed energies.
inline double rho_from(const Vec3& p, double p0, const Vec3& q, double q0) {
  const Vec3 d = p - q;
  const Vec3 w = 0.5 * cross(d, p + q);
  const double d2 = norm_sq(d);
  const double numer = d2 + norm_sq(w);
  const double e2 = p0 * q0;
  double denom = e2 + dot(p, q) + 1.0;
  denom = denom < 1.0 ? 1.0 : (denom > 2.0 * e2 ? 2.0 * e2 : denom);
  // denom <= 2 e2 already gives r >= numer / (2 e2): rounded division is monotone.
  const double r = numer / denom;
  const double hi = 0.5 * d2;
  return r > hi ? hi : r;
}

/// Phi and B for a pair with precomputed energies, no argument validation.
/// Used by the particle solvers; eps_reg must be > 0 unless the caller
/// guarantees p != q. Symmetric in (p, q) for Phi, antisymmetric for B,
/// bit for bit.
inline PairCoefficients pair_coefficients(const Vec3& p, double p0, const Vec3& q, double q0,
                                          double eps_reg) {
  const double rho0 = rho_from(p, p0, q, q0);
  const Vec3 d = p - q;
  const double e2 = p0 * q0;

  const double r = rho0 + eps_reg;
  const double rt = r * (r + 2.0);
  const double lam = (r + 1.0) * (r + 1.0) / (e2 * rt * std::sqrt(rt));

  const double rt0 = rho0 * (rho0 + 2.0);
  PairCoefficients c;
  c.phi.xx = lam * (rt0 - d.x * d.x + 2.0 * rho0 * (p.x * q.x));
  c.phi.yy = lam * (rt0 - d.y * d.y + 2.0 * rho0 * (p.y * q.y));
  c.phi.zz = lam * (rt0 - d.z * d.z + 2.0 * rho0 * (p.z * q.z));
  c.phi.xy = lam * (-d.x * d.y + rho0 * (p.x * q.y + p.y * q.x));
  c.phi.xz = lam * (-d.x * d.z + rho0 * (p.x * q.z + p.z * q.x));
  c.phi.yz = lam * (-d.y * d.z + rho0 * (p.y * q.z + p.z * q.y));
  const double bf = lam * (r + 2.0);
  c.drift = {bf * (q.x - p.x), bf * (q.y - p.y), bf * (q.z - p.z)};
  return c;
}

}  // namespace rellandau::kernel
