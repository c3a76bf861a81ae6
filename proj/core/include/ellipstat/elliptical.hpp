#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ellipstat/types.hpp"

namespace ellipstat {

// Family of elliptical laws available to the sampler: X = mu + xi * A * u with
// A the symmetric PSD square root of the scatter matrix.
struct EllipticalSpec {
  enum class Family { Gaussian, Student, GaussianScaleMixture };

  Family family = Family::Gaussian;
  double nu = 0.0;  // Student degrees of freedom
  std::vector<double> mixture_weights;
  std::vector<double> mixture_scales;
  Vector location;
  Matrix scatter;

  static EllipticalSpec gaussian(Vector mu, Matrix s);
  static EllipticalSpec student(double nu, Vector mu, Matrix s);
  static EllipticalSpec scale_mixture(std::vector<double> weights,
                                      std::vector<double> scales, Vector mu,
                                      Matrix s);

  // Checks invariants (PD scatter, valid family parameters).
  void validate() const;
};

// Empirical inverse and positive radial moments of r_i = ||D^{-1/2}(X_i - c)||.
// zeta[k] = mean r^{-k} (k = 1..4), pos[k] = mean r^k (k = 1, 2).
struct RadialMoments {
  std::map<int, double> zeta;
  std::map<int, double> pos;
};

struct ConditionalParams {
  Vector cond_location;  // mu_1 + S12 S22^{-1} (x2 - mu2)
  Matrix cond_scatter;   // Schur complement S11 - S12 S22^{-1} S21
  double delta2 = 0.0;   // (x2 - mu2)^T S22^{-1} (x2 - mu2)
};

// x / ||x||_2, with U(0) = 0.
Vector spatial_sign(const Vector& x);

// (1/n) sum_j U(x - X_j).
Vector spatial_rank(const Vector& x, const DataMatrix& sample);

// Draw n iid rows; identical (spec, n, seed) gives bit-identical output, and
// rows use independent substreams keyed by (seed, row) so parallel generation
// is order-independent.
DataMatrix sample_elliptical(const EllipticalSpec& spec, Eigen::Index n,
                             std::uint64_t seed);

RadialMoments radial_moments(const DataMatrix& data, const Vector& center,
                             const Vector& diag_scale);

ConditionalParams conditional_params(const Vector& location, const Matrix& scatter,
                                     Eigen::Index split, const Vector& x2);

}  // namespace ellipstat
