#pragma once

#include <array>

#include "rellandau/types.hpp"

namespace rellandau::linalg {

struct SymEigen {
  std::array<double, 3> values{};  // ascending
  Mat3 vectors;                    // columns are eigenvectors
};

/// Eigendecomposition of the symmetric part of m.
SymEigen sym_eigen(const Mat3& m);

double min_eigenvalue(const Mat3& m);

/// True when every eigenvalue of the symmetric matrix m is >= -rel_floor * ||m||_F.
bool is_psd(const Mat3& m, double rel_floor = 1e-9);

/// Symmetric PSD square root R with R R^T = R^2 = m. Eigenvalues in
/// [-clamp_tol * ||m||, 0) are clamped to zero; more negative ones make the
/// function throw NumericError.
Mat3 sqrt_psd(const Mat3& m, double clamp_tol = 1e-6);

}  // namespace rellandau::linalg
