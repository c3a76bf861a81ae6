#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ellipstat/estimators.hpp"
#include "ellipstat/types.hpp"

namespace ellipstat {

struct SubspaceEstimate {
  Matrix basis;        // orthonormal p x r
  Vector eigenvalues;  // leading r values of the source matrix
  std::string source;
  bool degenerate_gap = false;
};

struct SparseDirection {
  Vector vector;  // unit, at most s nonzeros
  Eigen::Index support_size = 0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FactorNumber {
  int k = 0;
  bool eigenvalue_floored = false;
};

struct CCAPair {
  Vector u;
  Vector v;
  double rho = 0.0;
  double budget_x = 0.0;
  double budget_y = 0.0;
  int iterations = 0;
  bool converged = false;
  bool ill_conditioned = false;
};

// Leading-r eigenspace of the spatial-median-centered SSCM.
SubspaceEstimate spca_subspace(const DataMatrix& data, Eigen::Index r);

// l0-sparse leading direction by truncated power iteration on the SSCM. When
// given, objective_trace records v^T M v after every iteration.
SparseDirection sspca_leading(const DataMatrix& data, Eigen::Index s,
                              const std::optional<Vector>& init = std::nullopt,
                              int max_iter = 1000,
                              std::vector<double>* objective_trace = nullptr);

// Eigenratio selection rule on a descending eigenvalue vector; exposed for
// direct checks on synthetic spectra.
int eigenratio_select(const Vector& eigenvalues, Eigen::Index k_max,
                      bool* floored = nullptr);

// Leading-r eigenspace of the generalized weighted sign matrix.
SubspaceEstimate gspca_subspace(const DataMatrix& data, GsscmFamily family,
                                Eigen::Index r);

FactorNumber factor_number_eigenratio(const DataMatrix& data, Eigen::Index k_max,
                                      const std::string& source);

// Leading-K eigenspace of the sample Kendall matrix.
SubspaceEstimate kendall_factor(const DataMatrix& data, Eigen::Index k);

// Sparse canonical pair from the whitened cross block of the joint SSCM,
// fitted by alternating soft-threshold maximization.
CCAPair sscca_fit(const DataMatrix& x, const DataMatrix& y, double c_x, double c_y,
                  int max_iter = 500, double eig_floor = 1e-6);

}  // namespace ellipstat
