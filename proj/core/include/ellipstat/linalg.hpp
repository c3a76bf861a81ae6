#pragma once

#include "ellipstat/types.hpp"

namespace ellipstat {

struct EigenSystem {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // orthonormal columns, matching order
};

// Spectral decomposition of a symmetric matrix, eigenvalues sorted descending.
EigenSystem sym_eigen(const Matrix& a);

// Zero out entries with |i - j| > h, keep the rest.
Matrix band(const Matrix& a, Eigen::Index h);

// Frobenius sin-theta distance between the column spans of two orthonormal
// bases: 2^{-1/2} ||U U^T - W W^T||_F, in [0, sqrt(r)].
double sin_theta(const Matrix& u, const Matrix& w);

// Symmetric positive semidefinite square root (eigendecomposition route).
Matrix sym_sqrt(const Matrix& a);

// Inverse symmetric square root with a relative eigenvalue floor. Eigenvalues
// below floor_rel * lambda_max are lifted to the floor; floored_count reports
// how many were lifted.
Matrix sym_inv_sqrt(const Matrix& a, double floor_rel, int* floored_count = nullptr);

inline bool is_symmetric(const Matrix& a, double rel_tol = 1e-12) {
  if (a.rows() != a.cols()) return false;
  double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale * 2.0;
}

}  // namespace ellipstat
