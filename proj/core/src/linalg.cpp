#include "ellipstat/linalg.hpp"

#include <Eigen/Eigenvalues>

#include "ellipstat/errors.hpp"

namespace ellipstat {

EigenSystem sym_eigen(const Matrix& a) {
  require(a.rows() == a.cols(), ErrorCode::InvalidInput, "matrix must be square");
  require(a.allFinite(), ErrorCode::InvalidInput, "matrix has non-finite entries");
  // Work on the symmetrized matrix so tiny asymmetries cannot leak through.
  Matrix s = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
  require(solver.info() == Eigen::Success, ErrorCode::InvalidInput,
          "eigendecomposition failed");
  const Eigen::Index p = a.rows();
  EigenSystem out;
  out.eigenvalues.resize(p);
  out.eigenvectors.resize(p, p);
  // Eigen returns ascending order; flip to descending.
  for (Eigen::Index j = 0; j < p; ++j) {
    out.eigenvalues(j) = solver.eigenvalues()(p - 1 - j);
    out.eigenvectors.col(j) = solver.eigenvectors().col(p - 1 - j);
  }
  return out;
}

Matrix band(const Matrix& a, Eigen::Index h) {
  require(h >= 0, ErrorCode::InvalidInput, "bandwidth must be nonnegative");
  Matrix out = a;
  const Eigen::Index p = a.rows();
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (std::abs(static_cast<long long>(i) - static_cast<long long>(j)) > h)
        out(i, j) = 0.0;
  return out;
}

double sin_theta(const Matrix& u, const Matrix& w) {
  require(u.cols() == w.cols(), ErrorCode::InvalidInput,
          "subspace bases must have the same number of columns");
  require(u.rows() == w.rows(), ErrorCode::InvalidInput,
          "subspace bases must have the same ambient dimension");
  Matrix diff = u * u.transpose() - w * w.transpose();
  return diff.norm() / std::sqrt(2.0);
}

Matrix sym_sqrt(const Matrix& a) {
  EigenSystem es = sym_eigen(a);
  Vector d = es.eigenvalues.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors * d.asDiagonal() * es.eigenvectors.transpose();
}

Matrix sym_inv_sqrt(const Matrix& a, double floor_rel, int* floored_count) {
  EigenSystem es = sym_eigen(a);
  const double lmax = es.eigenvalues(0);
  require(lmax > 0.0, ErrorCode::SingularBlock, "matrix has no positive eigenvalue");
  const double floor_abs = floor_rel * lmax;
  int floored = 0;
  Vector d(es.eigenvalues.size());
  for (Eigen::Index j = 0; j < d.size(); ++j) {
    double lj = es.eigenvalues(j);
    if (lj < floor_abs) {
      lj = floor_abs;
      ++floored;
    }
    d(j) = 1.0 / std::sqrt(lj);
  }
  if (floored_count) *floored_count = floored;
  return es.eigenvectors * d.asDiagonal() * es.eigenvectors.transpose();
}

}  // namespace ellipstat
