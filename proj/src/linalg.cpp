#include "rellandau/linalg.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "rellandau/errors.hpp"

namespace rellandau::linalg {

namespace {

Eigen::Matrix3d to_eigen(const Mat3& m) {
  Eigen::Matrix3d e;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) e(i, j) = 0.5 * (m(i, j) + m(j, i));
  return e;
}

}  // namespace

SymEigen sym_eigen(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(to_eigen(m));
  SymEigen out;
  for (int i = 0; i < 3; ++i) {
    out.values[i] = solver.eigenvalues()(i);
    for (int j = 0; j < 3; ++j) out.vectors(j, i) = solver.eigenvectors()(j, i);
  }
  return out;
}

double min_eigenvalue(const Mat3& m) { return sym_eigen(m).values[0]; }

bool is_psd(const Mat3& m, double rel_floor) {
  return min_eigenvalue(m) >= -rel_floor * m.norm();
}

Mat3 sqrt_psd(const Mat3& m, double clamp_tol) {
  const SymEigen eig = sym_eigen(m);
  const double scale = m.norm();
  std::array<double, 3> roots{};
  for (int i = 0; i < 3; ++i) {
    const double lam = eig.values[i];
    if (lam < -clamp_tol * scale) {
      std::ostringstream msg;
      msg << "sqrt_psd: eigenvalue " << lam << " below floor for matrix of norm " << scale;
      throw NumericError(msg.str());
    }
    roots[i] = lam > 0.0 ? std::sqrt(lam) : 0.0;
  }
  Mat3 r;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += eig.vectors(i, k) * roots[k] * eig.vectors(j, k);
      r(i, j) = s;
    }
  return r;
}

}  // namespace rellandau::linalg
