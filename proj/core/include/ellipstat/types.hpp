#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>

namespace ellipstat {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Observations are rows: an n x p matrix holds n sample vectors in R^p.
using DataMatrix = Eigen::MatrixXd;

inline Eigen::Index sample_size(const DataMatrix& x) { return x.rows(); }
inline Eigen::Index dimension(const DataMatrix& x) { return x.cols(); }

// Calibration family attached to a test result; `parameters` holds the
// centering/scaling constants actually used (count for extreme-value laws,
// degrees of freedom for chi-square, and so on).
struct Calibration {
  enum class Family { Normal, GumbelTypeI, ChiSquare, CauchyCombined };
  Family family = Family::Normal;
  std::map<std::string, double> parameters;

  static Calibration normal() { return {Family::Normal, {}}; }
  static Calibration gumbel(double count) {
    return {Family::GumbelTypeI, {{"count", count}}};
  }
  static Calibration chi_square(double df) {
    return {Family::ChiSquare, {{"df", df}}};
  }
  static Calibration cauchy(bool truncated) {
    return {Family::CauchyCombined, {{"truncated", truncated ? 1.0 : 0.0}}};
  }
};

inline const char* calibration_family_name(Calibration::Family f) {
  switch (f) {
    case Calibration::Family::Normal: return "normal";
    case Calibration::Family::GumbelTypeI: return "gumbel_type_I";
    case Calibration::Family::ChiSquare: return "chi_square";
    case Calibration::Family::CauchyCombined: return "cauchy_combined";
  }
  return "unknown";
}

struct TestResult {
  std::string name;
  double statistic = 0.0;
  double pvalue = 1.0;
  Calibration calibration;
  // Plug-in quantities used by the calibration (sigma_hat, trace estimates,
  // c0_hat, ...), kept for diagnostics and reporting.
  std::map<std::string, double> nuisance;
};

}  // namespace ellipstat
