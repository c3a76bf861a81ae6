#include "ellipstat/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ellipstat/elliptical.hpp"
#include "ellipstat/errors.hpp"
#include "ellipstat/linalg.hpp"

namespace ellipstat {

namespace {

Vector column_medians(const DataMatrix& data) {
  const Eigen::Index n = data.rows(), p = data.cols();
  Vector out(p);
  std::vector<double> col(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < p; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) col[static_cast<std::size_t>(i)] = data(i, j);
    std::sort(col.begin(), col.end());
    const std::size_t m = col.size();
    out(j) = (m % 2 == 1) ? col[m / 2] : 0.5 * (col[m / 2 - 1] + col[m / 2]);
  }
  return out;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size();
  return (m % 2 == 1) ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

// Shared data-scale used to decide "coincides with a data point".
double data_spread(const DataMatrix& data) {
  double s = data.cwiseAbs().maxCoeff();
  return s > 0.0 ? s : 1.0;
}

}  // namespace

GsscmFamily gsscm_family_from_string(const std::string& name) {
  if (name == "winsor") return GsscmFamily::Winsor;
  if (name == "quad_winsor") return GsscmFamily::QuadWinsor;
  if (name == "ball") return GsscmFamily::Ball;
  if (name == "shell") return GsscmFamily::Shell;
  if (name == "lr") return GsscmFamily::LinearRedescending;
  if (name == "none") return GsscmFamily::None;
  fail(ErrorCode::InvalidInput, "unknown gsscm family '" + name + "'");
}

SpatialMedian spatial_median(const DataMatrix& data, double tol, int max_iter) {
  const Eigen::Index n = data.rows(), p = data.cols();
  require(n >= 1 && p >= 1, ErrorCode::InvalidInput, "empty data");
  require(data.allFinite(), ErrorCode::InvalidInput, "non-finite data");
  require(tol > 0.0, ErrorCode::InvalidInput, "tol must be positive");

  SpatialMedian result;
  if (n == 1) {
    result.theta = data.row(0).transpose();
    result.converged = true;
    result.at_data_point = true;
    return result;
  }

  const double coincide_eps = 1e-12 * data_spread(data);
  Vector theta = data.colwise().mean().transpose();
  double best_residual = std::numeric_limits<double>::infinity();
  Vector best_theta = theta;

  for (int iter = 0; iter < max_iter; ++iter) {
    // Distances and the sign score at the current iterate.
    Vector score = Vector::Zero(p);
    Eigen::Index anchor = -1;
    double inv_sum = 0.0;
    Vector weighted = Vector::Zero(p);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector diff = data.row(i).transpose() - theta;
      const double d = diff.norm();
      if (d <= coincide_eps) {
        anchor = i;
        continue;
      }
      score += diff / d;
      inv_sum += 1.0 / d;
      weighted += data.row(i).transpose() / d;
    }
    const double residual = score.norm() / static_cast<double>(n);
    if (residual < best_residual) {
      best_residual = residual;
      best_theta = theta;
    }
    result.iterations = iter;

    if (anchor >= 0) {
      // Data-point optimality: theta equals X_anchor; it is the minimizer iff
      // the leave-one-out score has norm at most one.
      if (score.norm() <= 1.0) {
        result.theta = theta;
        result.residual = residual;
        result.converged = true;
        result.at_data_point = true;
        return result;
      }
      // Vardi-Zhang step away from a non-optimal data point.
      Vector t_tilde = weighted / inv_sum;
      const double step = std::min(1.0, 1.0 / score.norm());
      theta = (1.0 - step) * t_tilde + step * theta;
      continue;
    }

    if (residual <= tol) {
      result.theta = theta;
      result.residual = residual;
      result.converged = true;
      return result;
    }
    theta = weighted / inv_sum;
  }

  result.theta = best_theta;
  result.residual = best_residual;
  result.converged = false;
  return result;
}

namespace {

// One pass of the joint location/scale update; K(t) = t^m weights the
// location equation only. Rows drop1/drop2 (when nonnegative) are excluded.
void location_scale_sweep(const DataMatrix& data, double m, Vector& theta,
                          Vector& dvec, Eigen::Index drop1 = -1,
                          Eigen::Index drop2 = -1) {
  const Eigen::Index n = data.rows(), p = data.cols();
  Vector inv_sd = dvec.cwiseSqrt().cwiseInverse();

  Vector num = Vector::Zero(p);
  double den = 0.0;
  Vector diag_acc = Vector::Zero(p);
  Eigen::Index used = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i == drop1 || i == drop2) continue;
    ++used;
    Vector eps = (data.row(i).transpose() - theta).cwiseProduct(inv_sd);
    const double r = eps.norm();
    if (r <= 0.0) continue;
    Vector u = eps / r;
    const double w = (m == 0.0) ? 1.0 : std::pow(r, m);
    num += w * u;
    den += w / r;
    diag_acc += u.cwiseAbs2();
  }
  if (den > 0.0) theta += dvec.cwiseSqrt().cwiseProduct(num / den);
  // d_j <- p * d_j * mean_i U_ij^2, evaluated at the pre-update residuals.
  dvec = static_cast<double>(p) / static_cast<double>(used) *
         dvec.cwiseProduct(diag_acc);
}

void location_scale_residuals(const DataMatrix& data, double m, const Vector& theta,
                              const Vector& dvec, double* loc_res,
                              double* scale_res) {
  const Eigen::Index n = data.rows(), p = data.cols();
  Vector inv_sd = dvec.cwiseSqrt().cwiseInverse();
  Vector score = Vector::Zero(p);
  Vector diag_acc = Vector::Zero(p);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector eps = (data.row(i).transpose() - theta).cwiseProduct(inv_sd);
    const double r = eps.norm();
    if (r <= 0.0) continue;
    Vector u = eps / r;
    const double w = (m == 0.0) ? 1.0 : std::pow(r, m);
    score += w * u;
    diag_acc += u.cwiseAbs2();
  }
  *loc_res = score.norm() / static_cast<double>(n);
  *scale_res = (static_cast<double>(p) / static_cast<double>(n) * diag_acc -
                Vector::Ones(p))
                   .cwiseAbs()
                   .maxCoeff();
}

LocationScale solve_location_scale(const DataMatrix& data, double m, double tol,
                                   int max_iter) {
  const Eigen::Index n = data.rows(), p = data.cols();
  require(n >= 3, ErrorCode::InsufficientSamples, "need at least 3 observations");
  require(data.allFinite(), ErrorCode::InvalidInput, "non-finite data");
  require(m >= -1.0 && m <= 1.0, ErrorCode::InvalidInput, "weight power m in [-1,1]");

  LocationScale out;
  out.theta = column_medians(data);
  Vector means = data.colwise().mean().transpose();
  Vector dvec(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    dvec(j) = (data.col(j).array() - means(j)).square().sum() /
              static_cast<double>(n);
    require(dvec(j) > 0.0, ErrorCode::DegenerateScale,
            "column " + std::to_string(j) + " is constant");
  }

  for (int iter = 1; iter <= max_iter; ++iter) {
    location_scale_residuals(data, m, out.theta, dvec, &out.location_residual,
                             &out.scale_residual);
    out.iterations = iter - 1;
    if (out.location_residual <= tol && out.scale_residual <= tol) {
      out.diag_scale = dvec;
      out.converged = true;
      return out;
    }
    location_scale_sweep(data, m, out.theta, dvec);
    require(dvec.minCoeff() > 0.0 && dvec.allFinite(), ErrorCode::DegenerateScale,
            "scale iteration collapsed");
  }
  location_scale_residuals(data, m, out.theta, dvec, &out.location_residual,
                           &out.scale_residual);
  out.iterations = max_iter;
  out.diag_scale = dvec;
  out.converged = false;
  return out;
}

}  // namespace

LocationScale scaled_spatial_median(const DataMatrix& data, double tol,
                                    int max_iter) {
  return solve_location_scale(data, 0.0, tol, max_iter);
}

LocationScale leave_two_out_refine(const DataMatrix& data, const LocationScale& full,
                                   Eigen::Index drop1, Eigen::Index drop2,
                                   int sweeps) {
  require(data.rows() >= 5, ErrorCode::InsufficientSamples,
          "need at least 3 retained observations");
  LocationScale out = full;
  for (int s = 0; s < sweeps; ++s)
    location_scale_sweep(data, 0.0, out.theta, out.diag_scale, drop1, drop2);
  require(out.diag_scale.minCoeff() > 0.0 && out.diag_scale.allFinite(),
          ErrorCode::DegenerateScale, "leave-two-out refinement collapsed");
  return out;
}

LocationScale weighted_spatial_median(const DataMatrix& data, double m, double tol,
                                      int max_iter) {
  return solve_location_scale(data, m, tol, max_iter);
}

SSCMEstimate sscm(const DataMatrix& data, const Vector& center) {
  const Eigen::Index n = data.rows(), p = data.cols();
  require(n >= 1, ErrorCode::InvalidInput, "empty data");
  require(center.size() == p, ErrorCode::InvalidInput, "center dimension mismatch");
  Vector radii(n);
  for (Eigen::Index i = 0; i < n; ++i)
    radii(i) = (data.row(i).transpose() - center).norm();
  const double r_floor = 1e-12 * std::max(radii.maxCoeff(), 1e-300);

  Matrix acc = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    require(radii(i) > r_floor, ErrorCode::DegenerateObservation,
            "observation " + std::to_string(i) + " equals the center");
    Vector diff = (data.row(i).transpose() - center) / radii(i);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(diff, 1.0);
  }
  SSCMEstimate out;
  out.matrix = Matrix(acc.selfadjointView<Eigen::Lower>()) / static_cast<double>(n);
  out.center_used = center;
  return out;
}

Matrix gsscm(const DataMatrix& data, const Vector& center, GsscmFamily family) {
  const Eigen::Index n = data.rows(), p = data.cols();
  require(n >= 3, ErrorCode::InvalidInput, "need at least 3 observations");
  require(center.size() == p, ErrorCode::InvalidInput, "center dimension mismatch");

  Vector radii(n);
  for (Eigen::Index i = 0; i < n; ++i)
    radii(i) = (data.row(i).transpose() - center).norm();

  // Wilson-Hilferty transformed radii drive the cutoffs; hmed/hmad are the
  // sample median and the unscaled median absolute deviation.
  std::vector<double> d(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    d[static_cast<std::size_t>(i)] = std::pow(radii(i), 2.0 / 3.0);
  const double hmed = median_of(d);
  std::vector<double> dev = d;
  for (double& v : dev) v = std::abs(v - hmed);
  const double hmad = median_of(dev);

  auto q = [&](double offset) {
    const double base = hmed + offset;
    return base <= 0.0 ? 0.0 : std::pow(base, 1.5);
  };
  const double q1 = q(-hmad);
  const double q2 = q(0.0);
  const double q3 = q(hmad);
  const double q3s = q(1.4826 * hmad);

  auto xi = [&](double r) -> double {
    switch (family) {
      case GsscmFamily::Winsor:
        return r <= q2 ? 1.0 : q2 / r;
      case GsscmFamily::QuadWinsor:
        return r <= q2 ? 1.0 : (q2 * q2) / (r * r);
      case GsscmFamily::Ball:
        return r <= q2 ? 1.0 : 0.0;
      case GsscmFamily::Shell:
        return (r > q1 && r <= q3) ? 1.0 : 0.0;
      case GsscmFamily::LinearRedescending:
        if (r <= q2) return 1.0;
        if (r <= q3s) return (q3s - r) / (q3s - q2);
        return 0.0;
      case GsscmFamily::None:
        return r > 0.0 ? 1.0 / r : 0.0;
    }
    return 0.0;
  };

  Matrix acc = Matrix::Zero(p, p);
  bool any_nonzero = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w = xi(radii(i));
    if (w == 0.0) continue;
    any_nonzero = true;
    Vector v = w * (data.row(i).transpose() - center);
    acc.selfadjointView<Eigen::Lower>().rankUpdate(v, 1.0);
  }
  require(any_nonzero, ErrorCode::DegenerateWeights,
          "all radial weights vanish for this family");
  return Matrix(acc.selfadjointView<Eigen::Lower>()) / static_cast<double>(n);
}

Matrix kendall_tau_matrix(const DataMatrix& data) {
  const Eigen::Index n = data.rows(), p = data.cols();
  require(n >= 2, ErrorCode::InvalidInput, "need at least 2 observations");
  // Accumulate pairwise-difference signs in blocks so the outer products run
  // as matrix products; block order is fixed, so results are deterministic.
  constexpr Eigen::Index kBlock = 4096;
  Matrix acc = Matrix::Zero(p, p);
  Matrix block(kBlock, p);
  Eigen::Index filled = 0;
  auto flush = [&]() {
    if (filled == 0) return;
    acc.selfadjointView<Eigen::Lower>().rankUpdate(
        block.topRows(filled).transpose(), 1.0);
    filled = 0;
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Vector diff = (data.row(i) - data.row(j)).transpose();
      const double d = diff.norm();
      if (d == 0.0) continue;  // ties contribute zero via U(0) = 0
      block.row(filled++) = diff.transpose() / d;
      if (filled == kBlock) flush();
    }
  }
  flush();
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return Matrix(acc.selfadjointView<Eigen::Lower>()) / pairs;
}

namespace {

void tyler_degeneracy_checks(const DataMatrix& centered) {
  const Eigen::Index n = centered.rows(), p = centered.cols();
  // Rank of the centered data.
  Eigen::JacobiSVD<Matrix> svd(centered);
  const double smax = svd.singularValues()(0);
  Eigen::Index rank = 0;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k)
    if (svd.singularValues()(k) > 1e-10 * smax) ++rank;
  require(rank == p, ErrorCode::DegenerateConfiguration,
          "centered data do not span R^p");

  // Multiplicity of any single direction (proxy for subspace concentration).
  std::vector<Vector> dirs;
  dirs.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector u = centered.row(i).transpose();
    const double d = u.norm();
    if (d > 0.0) dirs.push_back(u / d);
  }
  const double threshold = static_cast<double>(n) / static_cast<double>(p);
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    int count = 1;
    for (std::size_t j = 0; j < dirs.size(); ++j) {
      if (i == j) continue;
      if (std::abs(dirs[i].dot(dirs[j])) >= 1.0 - 1e-10) ++count;
    }
    require(static_cast<double>(count) < threshold,
            ErrorCode::DegenerateConfiguration,
            "too many observations on one direction");
  }
}

}  // namespace

ShapeEstimate tyler(const DataMatrix& data, const Vector& center, double tol,
                    int max_iter, const Matrix* initial) {
  const Eigen::Index n = data.rows(), p = data.cols();
  require(center.size() == p, ErrorCode::InvalidInput, "center dimension mismatch");
  require(n > p, ErrorCode::InsufficientSamples, "tyler needs n > p");

  ShapeEstimate out;
  if (p == 1) {
    out.shape = Matrix::Ones(1, 1);
    out.converged = true;
    return out;
  }

  DataMatrix centered = data.rowwise() - center.transpose();
  tyler_degeneracy_checks(centered);

  Matrix v = initial ? *initial : Matrix::Identity(p, p);
  require(is_symmetric(v, 1e-8), ErrorCode::InvalidInput, "initial matrix not symmetric");
  v *= static_cast<double>(p) / v.trace();

  auto fixed_point_map = [&](const Matrix& cur) {
    Eigen::LDLT<Matrix> ldlt(cur);
    require(ldlt.info() == Eigen::Success && ldlt.isPositive(),
            ErrorCode::DegenerateConfiguration, "iterate lost positive definiteness");
    Matrix h = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector y = centered.row(i).transpose();
      const double denom = y.dot(ldlt.solve(y));
      require(denom > 0.0, ErrorCode::DegenerateObservation,
              "observation coincides with the center");
      h.selfadjointView<Eigen::Lower>().rankUpdate(y, 1.0 / denom);
    }
    Matrix hs = Matrix(h.selfadjointView<Eigen::Lower>()) *
                (static_cast<double>(p) / static_cast<double>(n));
    return Matrix(static_cast<double>(p) / hs.trace() * hs);
  };

  for (int iter = 1; iter <= max_iter; ++iter) {
    Matrix next = fixed_point_map(v);
    out.residual = (next - v).norm();
    out.iterations = iter;
    v = next;
    if (out.residual <= tol) {
      out.shape = v;
      out.converged = true;
      return out;
    }
  }
  out.shape = v;
  out.converged = false;
  return out;
}

double acg_loglik(const DataMatrix& signs, const Matrix& shape) {
  const Eigen::Index n = signs.rows(), p = signs.cols();
  require(shape.rows() == p && shape.cols() == p, ErrorCode::InvalidInput,
          "shape dimension mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    require(std::abs(signs.row(i).norm() - 1.0) <= 1e-6, ErrorCode::InvalidInput,
            "rows of `signs` must be unit vectors");

  Eigen::LDLT<Matrix> ldlt(shape);
  require(ldlt.info() == Eigen::Success && ldlt.isPositive() &&
              ldlt.vectorD().minCoeff() > 1e-300,
          ErrorCode::SingularShape, "shape matrix is singular");
  double logdet = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) logdet += std::log(ldlt.vectorD()(j));

  double sum_logs = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector w = signs.row(i).transpose();
    const double q = w.dot(ldlt.solve(w));
    require(q > 0.0, ErrorCode::SingularShape, "degenerate quadratic form");
    sum_logs += std::log(q);
  }
  return -0.5 * static_cast<double>(n) * logdet -
         0.5 * static_cast<double>(p) * sum_logs;
}

HREstimate hr_estimator(const DataMatrix& data, double tol, int max_iter) {
  const Eigen::Index n = data.rows(), p = data.cols();
  require(n > p, ErrorCode::InsufficientSamples, "hr needs n > p");

  HREstimate out;
  out.location = column_medians(data);
  tyler_degeneracy_checks(data.rowwise() - out.location.transpose());
  Matrix v = Matrix::Identity(p, p);

  auto residuals = [&](const Vector& mu, const Matrix& shape, double* loc_res,
                       double* shape_res) {
    Matrix inv_root = sym_inv_sqrt(shape, 1e-14);
    Vector score = Vector::Zero(p);
    Matrix outer = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector eps = inv_root * (data.row(i).transpose() - mu);
      const double r = eps.norm();
      if (r <= 0.0) continue;
      Vector u = eps / r;
      score += u;
      outer.selfadjointView<Eigen::Lower>().rankUpdate(u, 1.0);
    }
    *loc_res = score.norm() / static_cast<double>(n);
    Matrix m = Matrix(outer.selfadjointView<Eigen::Lower>()) *
               (static_cast<double>(p) / static_cast<double>(n));
    *shape_res = (m - Matrix::Identity(p, p)).norm();
  };

  for (int iter = 1; iter <= max_iter; ++iter) {
    residuals(out.location, v, &out.location_residual, &out.shape_residual);
    out.iterations = iter - 1;
    if (out.location_residual <= tol && out.shape_residual <= tol) {
      out.shape.shape = v;
      out.shape.converged = true;
      out.shape.iterations = out.iterations;
      out.converged = true;
      return out;
    }

    Matrix root = sym_sqrt(v);
    Matrix inv_root = sym_inv_sqrt(v, 1e-14);
    Vector score = Vector::Zero(p);
    double inv_norm_sum = 0.0;
    Matrix outer = Matrix::Zero(p, p);
    for (Eigen::Index i = 0; i < n; ++i) {
      Vector eps = inv_root * (data.row(i).transpose() - out.location);
      const double r = eps.norm();
      if (r <= 0.0) continue;
      score += eps / r;
      inv_norm_sum += 1.0 / r;
      outer.selfadjointView<Eigen::Lower>().rankUpdate(eps / r, 1.0);
    }
    out.location += root * (score / inv_norm_sum);
    Matrix mean_outer = Matrix(outer.selfadjointView<Eigen::Lower>()) /
                        static_cast<double>(n);
    v = static_cast<double>(p) * root * mean_outer * root;
    v = 0.5 * (v + v.transpose());
    v *= static_cast<double>(p) / v.trace();
  }

  residuals(out.location, v, &out.location_residual, &out.shape_residual);
  out.iterations = max_iter;
  out.shape.shape = v;
  out.shape.converged = false;
  out.converged = false;
  return out;
}

HREstimate hd_hr(const DataMatrix& data, const Matrix& pilot_inverse_shape,
                 Eigen::Index h, double tol, int max_iter) {
  const Eigen::Index n = data.rows(), p = data.cols();
  require(h >= 0, ErrorCode::InvalidInput, "bandwidth must be nonnegative");
  require(pilot_inverse_shape.rows() == p && pilot_inverse_shape.cols() == p,
          ErrorCode::InvalidInput, "pilot dimension mismatch");
  EigenSystem pil = sym_eigen(pilot_inverse_shape);
  require(pil.eigenvalues.minCoeff() > 0.0, ErrorCode::InvalidInput,
          "pilot inverse shape must be positive definite");

  // The pilot-whitened sign score is the spatial-median equation in the
  // whitened coordinates.
  Matrix w = sym_sqrt(pilot_inverse_shape);
  DataMatrix z = data * w;  // rows are W x_i since W is symmetric
  SpatialMedian med = spatial_median(z, tol, max_iter);
  require(med.converged, ErrorCode::NonConvergence,
          "whitened location solve did not converge");

  HREstimate out;
  Eigen::LDLT<Matrix> wldlt(w);
  out.location = wldlt.solve(med.theta);
  out.location_residual = med.residual;
  out.iterations = med.iterations;

  Matrix outer = Matrix::Zero(p, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector eps = z.row(i).transpose() - med.theta;
    const double r = eps.norm();
    require(r > 0.0, ErrorCode::DegenerateObservation,
            "observation coincides with the whitened center");
    outer.selfadjointView<Eigen::Lower>().rankUpdate(eps / r, 1.0);
  }
  // One Tyler step evaluated at the pilot: sandwich the whitened sign
  // second-moment by the pilot shape square root, then renormalize to trace p
  // before banding (banding keeps the diagonal, so the trace survives).
  Matrix pilot_shape_root = sym_inv_sqrt(pilot_inverse_shape, 1e-14);
  Matrix v_raw = static_cast<double>(p) * pilot_shape_root *
                 Matrix(outer.selfadjointView<Eigen::Lower>()) *
                 pilot_shape_root / static_cast<double>(n);
  v_raw = 0.5 * (v_raw + v_raw.transpose());
  v_raw *= static_cast<double>(p) / v_raw.trace();
  Matrix v_band = band(v_raw, h);
  out.shape.shape = v_band;
  out.shape.converged = true;

  Eigen::LDLT<Matrix> vldlt(v_band);
  require(vldlt.info() == Eigen::Success && vldlt.isPositive() &&
              vldlt.vectorD().minCoeff() > 1e-300,
          ErrorCode::SingularBand,
          "banded shape is singular; a larger bandwidth h may be needed");
  out.inverse_shape = band(vldlt.solve(Matrix::Identity(p, p)), h);

  double eta = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    eta += (data.row(i).transpose() - out.location).squaredNorm();
  eta /= static_cast<double>(n) * static_cast<double>(p);
  out.scatter = eta * v_band;
  out.converged = true;
  return out;
}

double trace_estimator(const DataMatrix& data) {
  const Eigen::Index n = data.rows();
  require(n >= 3, ErrorCode::InsufficientSamples, "need n >= 3");
  // sum over distinct (i,j,k) of (X_i - X_j)^T (X_k - X_j) collapses to
  // row-sum quantities; verified against the O(n^3) loop in the tests.
  Vector total = data.colwise().sum().transpose();
  const double q = data.rowwise().squaredNorm().sum();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector xj = data.row(j).transpose();
    acc += (total - static_cast<double>(n) * xj).squaredNorm();
    acc -= q - 2.0 * total.dot(xj) + static_cast<double>(n) * xj.squaredNorm();
  }
  const double denom = static_cast<double>(n) * static_cast<double>(n - 1) *
                       static_cast<double>(n - 2);
  return acc / denom;
}

double trace_r2_estimator(const DataMatrix& data, const LocationScale& loc_scale) {
  const Eigen::Index n = data.rows(), p = data.cols();
  require(n >= 2, ErrorCode::InsufficientSamples, "need n >= 2");
  Vector inv_sd = loc_scale.diag_scale.cwiseSqrt().cwiseInverse();
  DataMatrix u(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vector eps = (data.row(i).transpose() - loc_scale.theta).cwiseProduct(inv_sd);
    const double r = eps.norm();
    if (r > 0.0) eps /= r;
    u.row(i) = eps.transpose();
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dot = u.row(i).dot(u.row(j));
      acc += dot * dot;
    }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<double>(p) * static_cast<double>(p) * acc / pairs;
}

double trace_r2_estimator_exact(const DataMatrix& data, double tol, int max_iter) {
  const Eigen::Index n = data.rows(), p = data.cols();
  require(n >= 5, ErrorCode::InsufficientSamples, "need n >= 5 for leave-two-out");
  require(n <= 60, ErrorCode::SampleTooLarge, "exact leave-two-out capped at n = 60");

  double acc = 0.0;
  DataMatrix reduced(n - 2, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      Eigen::Index row = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k == i || k == j) continue;
        reduced.row(row++) = data.row(k);
      }
      LocationScale ls = scaled_spatial_median(reduced, tol, max_iter);
      Vector inv_sd = ls.diag_scale.cwiseSqrt().cwiseInverse();
      Vector ui = (data.row(i).transpose() - ls.theta).cwiseProduct(inv_sd);
      Vector uj = (data.row(j).transpose() - ls.theta).cwiseProduct(inv_sd);
      const double ni = ui.norm(), nj = uj.norm();
      if (ni > 0.0 && nj > 0.0) {
        const double dot = ui.dot(uj) / (ni * nj);
        acc += dot * dot;
      }
    }
  }
  const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  return static_cast<double>(p) * static_cast<double>(p) * acc / pairs;
}

}  // namespace ellipstat
