#pragma once

#include <optional>
#include <vector>

#include "ellipstat/types.hpp"

namespace ellipstat {

struct DantzigProblem {
  Matrix gram;    // symmetric PSD
  Vector target;
  double lambda = 0.0;
};

struct DantzigResult {
  Vector gamma;
  int iterations = 0;
  double constraint_violation = 0.0;  // max(0, ||A gamma - b||_inf - lambda)
  double dual_gap = 0.0;              // certified l1 optimality gap
  bool converged = false;
};

// Reusable solver: factors (I + A^T A) once and solves
//   min ||gamma||_1  s.t.  ||A gamma - b||_inf <= lambda
// by an alternating-direction splitting with over-relaxation.
class DantzigSolver {
 public:
  explicit DantzigSolver(Matrix gram);

  DantzigResult solve(const Vector& target, double lambda, double tol = 1e-7,
                      int max_iter = 20000) const;

  const Matrix& gram() const { return gram_; }

 private:
  Matrix gram_;
  Eigen::LDLT<Matrix> factorization_;
};

Vector dantzig_solve(const DantzigProblem& prob, double tol = 1e-7,
                     int max_iter = 20000);

// Column-wise Dantzig estimate of the inverse shape from p * SSCM, followed
// by smaller-magnitude symmetrization.
Matrix sclime(const Matrix& sign_cov_scaled, double lambda, double tol = 1e-7,
              int max_iter = 20000);

double sclime_default_lambda(Eigen::Index n, Eigen::Index p, double c = 2.0);

// Penalized log-determinant estimator
//   argmin_{V > 0} tr(G V) - log det V + lambda ||V||_{1,off}
// by coordinate descent with exact one-dimensional minimization. When given,
// objective_trace records the objective after every sweep.
Matrix sglasso(const Matrix& sign_cov_scaled, double lambda, double tol = 1e-6,
               int max_sweeps = 200, std::vector<double>* objective_trace = nullptr);

// Objective value of the sglasso program (diagonal unpenalized).
double sglasso_objective(const Matrix& gram, const Matrix& v, double lambda);

// pattern(i,j) = |V(i,j)| > tau, returned as 0/1.
Eigen::MatrixXi threshold_support(const Matrix& v, double tau);

struct LDAModel {
  Vector gamma;
  Vector midpoint;
  double lambda_used = 0.0;
  std::vector<Eigen::Index> support;
};

// Sparse sign-based discriminant direction: Dantzig solve of
// p * pooled-SSCM against the classwise spatial-median difference. A negative
// lambda requests the ridge-pilot automatic choice.
LDAModel sslda_fit(const DataMatrix& d1, const DataMatrix& d2,
                   std::optional<double> lambda = std::nullopt,
                   double auto_constant = 2.0);

int sslda_predict(const LDAModel& model, const Vector& z);

// Conditional misclassification risk of the midpoint rule with direction
// gamma under Gaussian classes; gamma = 0 returns 1/2.
double sslda_risk_gaussian(const Vector& gamma, const Vector& mu1,
                           const Vector& mu2, const Matrix& sigma);

}  // namespace ellipstat
