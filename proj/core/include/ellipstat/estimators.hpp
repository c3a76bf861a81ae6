#pragma once

#include <optional>
#include <string>

#include "ellipstat/types.hpp"

namespace ellipstat {

struct SpatialMedian {
  Vector theta;
  int iterations = 0;
  double residual = 0.0;     // ||(1/n) sum U(X_i - theta)||_2
  bool converged = false;
  bool at_data_point = false;
};

struct LocationScale {
  Vector theta;
  Vector diag_scale;  // positive diagonal of D-hat
  int iterations = 0;
  double location_residual = 0.0;  // ||mean U(D^{-1/2}(X - theta))||
  double scale_residual = 0.0;     // max_j |p * mean U_j^2 - 1|
  bool converged = false;
};

struct SSCMEstimate {
  Matrix matrix;       // PSD, trace exactly 1
  Vector center_used;
};

struct ShapeEstimate {
  Matrix shape;  // trace p
  bool trace_normalized = true;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct HREstimate {
  Vector location;
  ShapeEstimate shape;
  std::optional<Matrix> inverse_shape;  // banded variant only
  std::optional<Matrix> scatter;        // banded variant only
  double location_residual = 0.0;
  double shape_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

enum class GsscmFamily { Winsor, QuadWinsor, Ball, Shell, LinearRedescending, None };

GsscmFamily gsscm_family_from_string(const std::string& name);

inline constexpr double kDefaultTol = 1e-8;
inline constexpr int kDefaultMaxIter = 500;

// Weiszfeld-type minimizer of sum_i ||X_i - theta||, with the data-point
// optimality test ||sum_{j != i} U(X_j - X_i)|| <= 1 when an iterate lands on
// an observation.
SpatialMedian spatial_median(const DataMatrix& data, double tol = kDefaultTol,
                             int max_iter = kDefaultMaxIter);

// Joint location/diagonal-scale solve: sign score zero at theta-hat and
// p * diag of the sign outer-product mean equal to the identity.
LocationScale scaled_spatial_median(const DataMatrix& data, double tol = kDefaultTol,
                                    int max_iter = kDefaultMaxIter);

// Power-weighted location equation K(t) = t^m (m in [-1,1]) paired with the
// unweighted diagonal scale equation; m = 0 reproduces scaled_spatial_median.
LocationScale weighted_spatial_median(const DataMatrix& data, double m,
                                      double tol = kDefaultTol,
                                      int max_iter = kDefaultMaxIter);

SSCMEstimate sscm(const DataMatrix& data, const Vector& center);

// Generalized (radially weighted) sign covariance matrix with Wilson-Hilferty
// cutoffs from the transformed radii; family None uses xi(r) = 1/r.
Matrix gsscm(const DataMatrix& data, const Vector& center, GsscmFamily family);

// 2/(n(n-1)) sum_{i<j} U(X_i - X_j) U(X_i - X_j)^T; ties contribute zero.
Matrix kendall_tau_matrix(const DataMatrix& data);

ShapeEstimate tyler(const DataMatrix& data, const Vector& center,
                    double tol = kDefaultTol, int max_iter = kDefaultMaxIter,
                    const Matrix* initial = nullptr);

// ACG log-likelihood -(n/2) log det V - (p/2) sum log(W_i^T V^{-1} W_i) for
// unit rows of `signs`.
double acg_loglik(const DataMatrix& signs, const Matrix& shape);

HREstimate hr_estimator(const DataMatrix& data, double tol = kDefaultTol,
                        int max_iter = kDefaultMaxIter);

// High-dimensional HR: pilot-whitened sign score for the location, banded raw
// shape, banded inverse, and the trace-rescaled scatter.
HREstimate hd_hr(const DataMatrix& data, const Matrix& pilot_inverse_shape,
                 Eigen::Index h, double tol = kDefaultTol,
                 int max_iter = kDefaultMaxIter);

// Triple-indexed U-statistic over distinct (i,j,k), unbiased for tr(Sigma).
double trace_estimator(const DataMatrix& data);

// Warm-started approximation to the leave-two-out location/scale solution:
// `sweeps` joint fixed-point passes over the sample without the two dropped
// rows, starting from the full-sample solve. Two sweeps remove the first-order
// coupling between the scale estimate and the dropped pair.
LocationScale leave_two_out_refine(const DataMatrix& data, const LocationScale& full,
                                   Eigen::Index drop1, Eigen::Index drop2,
                                   int sweeps = 2);

// tr(R^2) plug-in: p^2 * 2/(n(n-1)) sum_{i<j} (U_i^T U_j)^2 on diagonally
// standardized signs from the supplied (theta, D) solve.
double trace_r2_estimator(const DataMatrix& data, const LocationScale& loc_scale);

// Exact leave-two-out variant (re-solves the scale equations per pair); only
// sensible at small n, enforced with a hard cap of 60.
double trace_r2_estimator_exact(const DataMatrix& data, double tol = kDefaultTol,
                                int max_iter = kDefaultMaxIter);

}  // namespace ellipstat
