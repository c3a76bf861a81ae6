#include "ellipstat/calibration.hpp"

#include <cmath>

#include "ellipstat/errors.hpp"

namespace ellipstat {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_upper_pvalue(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double gumbel_survival(double y) {
  return -std::expm1(-std::exp(-y / 2.0) / std::sqrt(kPi));
}

double gumbel_pvalue(double max_sq, long count) {
  require(count >= 2, ErrorCode::InvalidInput,
          "gumbel_pvalue needs count >= 2 (log log undefined)");
  require(std::isfinite(max_sq), ErrorCode::InvalidInput, "non-finite statistic");
  const double lp = std::log(static_cast<double>(count));
  const double y = max_sq - 2.0 * lp + std::log(lp);
  return gumbel_survival(y);
}

double u_p(double y, long count) {
  require(count >= 1, ErrorCode::InvalidInput, "count must be positive");
  const double lp = std::log(static_cast<double>(count));
  require(lp > 0.0 || count >= 2 || y > 0.0, ErrorCode::InvalidInput,
          "radicand not positive");
  const double radicand = 2.0 * lp - std::log(lp) + y;
  require(std::isfinite(radicand) && radicand > 0.0, ErrorCode::InvalidInput,
          "radicand not positive");
  return std::sqrt(radicand);
}

namespace {
double cauchy_upper(double t) {
  // 1 - F(t) for the standard Cauchy, evaluated stably in both tails.
  return 0.5 - std::atan(t) / kPi;
}
}  // namespace

double cauchy_combine(double p1, double p2, bool truncated) {
  require(p1 > 0.0 && p1 < 1.0 && p2 > 0.0 && p2 < 1.0, ErrorCode::InvalidInput,
          "p-values must lie strictly inside (0,1)");
  double t = 0.0;
  if (truncated) {
    if (p1 < 0.5) t += 0.5 * std::tan(kPi * (0.5 - p1));
    if (p2 < 0.5) t += 0.5 * std::tan(kPi * (0.5 - p2));
  } else {
    t = 0.5 * std::tan(kPi * (0.5 - p1)) + 0.5 * std::tan(kPi * (0.5 - p2));
  }
  return cauchy_upper(t);
}

double chi2_4_survival(double x) {
  if (x <= 0.0) return 1.0;
  return std::exp(-x / 2.0) * (1.0 + x / 2.0);
}

double fisher_combine(double p1, double p2) {
  require(p1 > 0.0 && p1 <= 1.0 && p2 > 0.0 && p2 <= 1.0, ErrorCode::InvalidInput,
          "p-values must lie in (0,1]");
  const double stat = -2.0 * std::log(p1) - 2.0 * std::log(p2);
  return chi2_4_survival(stat);
}

}  // namespace ellipstat
