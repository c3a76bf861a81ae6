#include "ellipstat/sparse_opt.hpp"

#include <algorithm>
#include <cmath>

#include "ellipstat/calibration.hpp"
#include "ellipstat/errors.hpp"
#include "ellipstat/estimators.hpp"
#include "ellipstat/linalg.hpp"

namespace ellipstat {

namespace {

Vector soft_threshold(const Vector& x, double t) {
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x(i);
    out(i) = (v > t) ? v - t : (v < -t ? v + t : 0.0);
  }
  return out;
}

}  // namespace

DantzigSolver::DantzigSolver(Matrix gram) : gram_(std::move(gram)) {
  require(gram_.rows() == gram_.cols(), ErrorCode::InvalidInput,
          "gram matrix must be square");
  require(gram_.allFinite(), ErrorCode::InvalidInput, "non-finite gram matrix");
  require(is_symmetric(gram_, 1e-8), ErrorCode::InvalidInput,
          "gram matrix must be symmetric");
  const Eigen::Index p = gram_.rows();
  factorization_.compute(Matrix::Identity(p, p) + gram_.transpose() * gram_);
  require(factorization_.info() == Eigen::Success, ErrorCode::InvalidInput,
          "failed to factor the splitting system");
}

DantzigResult DantzigSolver::solve(const Vector& target, double lambda, double tol,
                                   int max_iter) const {
  const Eigen::Index p = gram_.rows();
  require(target.size() == p, ErrorCode::InvalidInput, "target dimension mismatch");
  require(lambda >= 0.0, ErrorCode::InvalidInput, "lambda must be nonnegative");

  DantzigResult out;
  if (target.cwiseAbs().maxCoeff() <= lambda) {
    // Zero is feasible, and nothing has a smaller l1 norm.
    out.gamma = Vector::Zero(p);
    out.converged = true;
    return out;
  }

  constexpr double kAlpha = 1.6;  // over-relaxation
  double rho = 1.0;

  Vector gamma = Vector::Zero(p);
  Vector v = Vector::Zero(p);             // l1 split of gamma
  Vector z = Vector::Zero(p);             // box split of A gamma - b
  Vector u1 = Vector::Zero(p), u2 = Vector::Zero(p);  // scaled duals

  const double bscale = std::max(1.0, target.cwiseAbs().maxCoeff());

  for (int iter = 1; iter <= max_iter; ++iter) {
    Vector rhs = (v - u1) + gram_.transpose() * (target + z - u2);
    gamma = factorization_.solve(rhs);
    Vector a_gamma = gram_ * gamma;

    // Over-relaxed copies feed the proximal updates.
    Vector gamma_rel = kAlpha * gamma + (1.0 - kAlpha) * v;
    Vector a_rel = kAlpha * a_gamma + (1.0 - kAlpha) * (z + target);

    Vector v_old = v;
    Vector z_old = z;
    v = soft_threshold(gamma_rel + u1, 1.0 / rho);
    z = (a_rel - target + u2).cwiseMax(-lambda).cwiseMin(lambda);
    u1 += gamma_rel - v;
    u2 += a_rel - target - z;

    const double r1 = (gamma - v).norm();
    const double r2 = (a_gamma - target - z).norm();
    const double r_primal = std::sqrt(r1 * r1 + r2 * r2);
    const double s =
        rho * ((v - v_old) + gram_.transpose() * (z - z_old)).norm();
    out.iterations = iter;

    if (std::max(r_primal, s) <= tol * std::max(1.0, v.norm() + bscale)) break;

    // Residual balancing; the splitting system is rho-free, so only the
    // scaled duals rescale.
    if (iter % 10 == 0) {
      if (r_primal > 10.0 * s) {
        rho *= 2.0;
        u1 *= 0.5;
        u2 *= 0.5;
      } else if (s > 10.0 * r_primal) {
        rho *= 0.5;
        u1 *= 2.0;
        u2 *= 2.0;
      }
    }
  }

  out.gamma = v;
  const double viol = (gram_ * v - target).cwiseAbs().maxCoeff();
  out.constraint_violation = std::max(0.0, viol - lambda);

  // Dual certificate: nu = rho * u2 scaled into ||A nu||_inf <= 1 bounds the
  // optimal value from below by -b^T nu - lambda ||nu||_1.
  Vector nu = rho * u2;
  const double feas = (gram_ * nu).cwiseAbs().maxCoeff();
  if (feas > 1.0) nu /= feas;
  const double lower = -target.dot(nu) - lambda * nu.lpNorm<1>();
  out.dual_gap = v.lpNorm<1>() - lower;

  const double viol_tol = tol * 100.0 * std::max(1.0, bscale);
  if (out.constraint_violation <= viol_tol &&
      out.dual_gap <= std::sqrt(tol) * (1.0 + v.lpNorm<1>())) {
    out.converged = true;
    return out;
  }
  // For a positive definite gram matrix every target is reachable, so a large
  // residual violation after the iteration budget is the only infeasibility
  // signal worth raising.
  if (out.constraint_violation > 0.1 * lambda + viol_tol) {
    fail(ErrorCode::Infeasible,
         "constraint violation " + std::to_string(out.constraint_violation) +
             " above lambda after " + std::to_string(out.iterations) +
             " iterations");
  }
  fail(ErrorCode::NonConvergence,
       "splitting did not converge: violation=" +
           std::to_string(out.constraint_violation) +
           " gap=" + std::to_string(out.dual_gap));
}

Vector dantzig_solve(const DantzigProblem& prob, double tol, int max_iter) {
  DantzigSolver solver(prob.gram);
  return solver.solve(prob.target, prob.lambda, tol, max_iter).gamma;
}

Matrix sclime(const Matrix& sign_cov_scaled, double lambda, double tol,
              int max_iter) {
  require(lambda > 0.0, ErrorCode::InvalidInput, "lambda must be positive");
  const Eigen::Index p = sign_cov_scaled.rows();
  DantzigSolver solver(sign_cov_scaled);

  Matrix raw(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    Vector ej = Vector::Unit(p, j);
    try {
      raw.col(j) = solver.solve(ej, lambda, tol, max_iter).gamma;
    } catch (const StatError& e) {
      fail(e.code(), "column " + std::to_string(j) + ": " + e.what());
    }
  }

  // Smaller-magnitude entry wins in the symmetrization.
  Matrix out(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      out(i, j) = std::abs(raw(i, j)) <= std::abs(raw(j, i)) ? raw(i, j) : raw(j, i);
  return out;
}

double sclime_default_lambda(Eigen::Index n, Eigen::Index p, double c) {
  require(n >= 2 && p >= 1, ErrorCode::InvalidInput, "invalid sizes");
  return c * (std::sqrt(std::log(static_cast<double>(p)) / static_cast<double>(n)) +
              1.0 / std::sqrt(static_cast<double>(p)));
}

double sglasso_objective(const Matrix& gram, const Matrix& v, double lambda) {
  Eigen::LDLT<Matrix> ldlt(v);
  require(ldlt.info() == Eigen::Success && ldlt.isPositive(),
          ErrorCode::InvalidInput, "objective requires positive definite V");
  double logdet = 0.0;
  for (Eigen::Index j = 0; j < v.rows(); ++j)
    logdet += std::log(ldlt.vectorD()(j));
  double l1_off = 0.0;
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j)
      if (i != j) l1_off += std::abs(v(i, j));
  return (gram * v).trace() - logdet + lambda * l1_off;
}

namespace {

// Exact minimization of
//   g(t) = 2 G_ij t - log{(1 + t B_ij)^2 - t^2 B_ii B_jj} + 2 lambda |v + t|
// over the domain where the log argument stays positive. g is convex; the
// minimizer is found from the corner condition or a branch quadratic.
double offdiag_step(double gij, double bij, double bii, double bjj, double vij,
                    double lambda) {
  const double alpha = bij * bij - bii * bjj;  // < 0 for PD inverse
  // Domain endpoints: roots of 1 + 2 bij t + alpha t^2.
  const double disc = std::sqrt(bij * bij - alpha);
  const double t_lo = (-bij + disc) / alpha + 1e-14;
  const double t_hi = (-bij - disc) / alpha - 1e-14;

  auto smooth_grad = [&](double t) {
    const double h = 1.0 + 2.0 * bij * t + alpha * t * t;
    return 2.0 * gij - (2.0 * bij + 2.0 * alpha * t) / h;
  };

  // Corner t = -v: keep if 0 lies in the subdifferential.
  const double corner = -vij;
  if (corner > t_lo && corner < t_hi) {
    const double d = smooth_grad(corner);
    if (std::abs(d) <= 2.0 * lambda) return corner;
  }

  auto branch_root = [&](double sign) -> double {
    // Solve (gij + sign*lambda) h(t) = bij + alpha t on the branch where
    // v + t has sign `sign`.
    const double c = gij + sign * lambda;
    const double qa = alpha * c;
    const double qb = 2.0 * bij * c - alpha;
    const double qc = c - bij;
    double root = std::numeric_limits<double>::quiet_NaN();
    if (std::abs(qa) < 1e-300) {
      if (std::abs(qb) > 0.0) root = -qc / qb;
    } else {
      const double d2 = qb * qb - 4.0 * qa * qc;
      if (d2 >= 0.0) {
        const double sq = std::sqrt(d2);
        const double r1 = (-qb + sq) / (2.0 * qa);
        const double r2 = (-qb - sq) / (2.0 * qa);
        // Pick the root inside the domain with vanishing branch gradient.
        for (double r : {r1, r2}) {
          if (r > t_lo && r < t_hi &&
              std::abs(smooth_grad(r) + 2.0 * sign * lambda) < 1e-6) {
            root = r;
            break;
          }
        }
      }
    }
    return root;
  };

  // Positive branch: v + t > 0; negative branch: v + t < 0.
  const double rp = branch_root(1.0);
  if (std::isfinite(rp) && vij + rp > 0.0) return rp;
  const double rn = branch_root(-1.0);
  if (std::isfinite(rn) && vij + rn < 0.0) return rn;

  // Fallback: bisection on the subgradient (robust; rarely reached).
  double lo = t_lo, hi = t_hi;
  auto total_grad = [&](double t) {
    double g = smooth_grad(t);
    const double s = vij + t;
    g += 2.0 * lambda * (s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0));
    return g;
  };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (total_grad(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Matrix sglasso(const Matrix& sign_cov_scaled, double lambda, double tol,
               int max_sweeps, std::vector<double>* objective_trace) {
  const Eigen::Index p = sign_cov_scaled.rows();
  require(lambda > 0.0, ErrorCode::InvalidInput, "lambda must be positive");
  require(is_symmetric(sign_cov_scaled, 1e-8), ErrorCode::InvalidInput,
          "input must be symmetric");
  for (Eigen::Index j = 0; j < p; ++j)
    require(sign_cov_scaled(j, j) > 0.0, ErrorCode::InvalidInput,
            "diagonal entries must be positive");

  const Matrix& g = sign_cov_scaled;
  Matrix v = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) v(j, j) = 1.0 / g(j, j);
  Matrix b = Matrix::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) b(j, j) = g(j, j);

  auto refresh_inverse = [&]() {
    Eigen::LDLT<Matrix> ldlt(v);
    require(ldlt.info() == Eigen::Success && ldlt.isPositive(),
            ErrorCode::NonConvergence, "iterate lost positive definiteness");
    b = ldlt.solve(Matrix::Identity(p, p));
    b = 0.5 * (b + b.transpose());
  };

  auto kkt_residual = [&]() {
    double res = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      res = std::max(res, std::abs(g(i, i) - b(i, i)));
      for (Eigen::Index j = i + 1; j < p; ++j) {
        const double grad = g(i, j) - b(i, j);
        if (v(i, j) != 0.0)
          res = std::max(res, std::abs(grad + lambda * (v(i, j) > 0 ? 1.0 : -1.0)));
        else
          res = std::max(res, std::max(0.0, std::abs(grad) - lambda));
      }
    }
    return res;
  };

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // Column-by-column coordinate pass with rank-one/rank-two inverse updates.
    for (Eigen::Index j = 0; j < p; ++j) {
      {  // diagonal
        const double t = 1.0 / g(j, j) - 1.0 / b(j, j);
        if (std::abs(t) > 1e-16) {
          v(j, j) += t;
          Vector bj = b.col(j);
          b -= (t / (1.0 + t * b(j, j))) * (bj * bj.transpose());
        }
      }
      for (Eigen::Index i = 0; i < j; ++i) {
        const double t =
            offdiag_step(g(i, j), b(i, j), b(i, i), b(j, j), v(i, j), lambda);
        if (std::abs(t) <= 1e-16) continue;
        // Snap the post-update entry to exactly zero at the corner.
        double vnew = v(i, j) + t;
        if (std::abs(vnew) < 1e-14) vnew = 0.0;
        const double step = vnew - v(i, j);
        if (step == 0.0) continue;
        v(i, j) = vnew;
        v(j, i) = vnew;
        // Woodbury update for the rank-two perturbation step*(e_i e_j^T + e_j e_i^T):
        // (V + U C U^T)^{-1} = B - B U (C^{-1} + U^T B U)^{-1} U^T B.
        Eigen::Matrix2d cinv;
        cinv << 0.0, 1.0 / step, 1.0 / step, 0.0;
        Eigen::Matrix2d ubu;
        ubu << b(i, i), b(i, j), b(i, j), b(j, j);
        Eigen::Matrix2d mid = (cinv + ubu).inverse();
        Matrix bu(p, 2);
        bu.col(0) = b.col(i);
        bu.col(1) = b.col(j);
        b -= bu * mid * bu.transpose();
        b = 0.5 * (b + b.transpose());
      }
    }
    refresh_inverse();
    if (objective_trace)
      objective_trace->push_back(sglasso_objective(g, v, lambda));
    if (kkt_residual() <= tol) return v;
  }
  fail(ErrorCode::NonConvergence,
       "coordinate descent did not reach the KKT tolerance");
}

Eigen::MatrixXi threshold_support(const Matrix& v, double tau) {
  require(tau >= 0.0, ErrorCode::InvalidInput, "tau must be nonnegative");
  Eigen::MatrixXi out(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index j = 0; j < v.cols(); ++j)
      out(i, j) = std::abs(v(i, j)) > tau ? 1 : 0;
  return out;
}

LDAModel sslda_fit(const DataMatrix& d1, const DataMatrix& d2,
                   std::optional<double> lambda, double auto_constant) {
  const Eigen::Index n1 = d1.rows(), n2 = d2.rows(), p = d1.cols();
  require(n1 >= 4 && n2 >= 4, ErrorCode::InsufficientSamples,
          "need at least 4 observations per class");
  require(d2.cols() == p, ErrorCode::InvalidInput, "dimension mismatch");

  SpatialMedian m1 = spatial_median(d1);
  SpatialMedian m2 = spatial_median(d2);
  require(m1.converged && m2.converged, ErrorCode::NonConvergence,
          "classwise spatial median did not converge");

  SSCMEstimate s1 = sscm(d1, m1.theta);
  SSCMEstimate s2 = sscm(d2, m2.theta);
  Matrix pooled =
      (static_cast<double>(n1) * s1.matrix + static_cast<double>(n2) * s2.matrix) /
      static_cast<double>(n1 + n2);
  Matrix gram = static_cast<double>(p) * pooled;
  Vector delta = m1.theta - m2.theta;

  const double n = static_cast<double>(std::min(n1, n2));
  double lam;
  if (lambda) {
    lam = *lambda;
    require(lam >= 0.0, ErrorCode::InvalidInput, "lambda must be nonnegative");
  } else {
    // Ridge pilot supplies the unknown discriminant signal size.
    const double ridge = std::sqrt(std::log(static_cast<double>(p)) / n);
    Matrix reg = gram + ridge * Matrix::Identity(p, p);
    Vector pilot = reg.ldlt().solve(delta);
    const double delta_p = std::max(delta.dot(pilot), 1e-12);
    lam = auto_constant *
          std::sqrt(delta_p * std::log(static_cast<double>(p)) / n);
  }

  LDAModel model;
  model.midpoint = 0.5 * (m1.theta + m2.theta);
  model.lambda_used = lam;
  DantzigSolver solver(gram);
  DantzigResult res = solver.solve(delta, lam);
  model.gamma = res.gamma;
  for (Eigen::Index i = 0; i < p; ++i)
    if (model.gamma(i) != 0.0) model.support.push_back(i);
  return model;
}

int sslda_predict(const LDAModel& model, const Vector& z) {
  require(z.size() == model.gamma.size(), ErrorCode::InvalidInput,
          "dimension mismatch");
  return (z - model.midpoint).dot(model.gamma) >= 0.0 ? 1 : 2;
}

double sslda_risk_gaussian(const Vector& gamma, const Vector& mu1,
                           const Vector& mu2, const Matrix& sigma) {
  require(mu1.size() == gamma.size() && mu2.size() == gamma.size(),
          ErrorCode::InvalidInput, "dimension mismatch");
  require(sigma.rows() == gamma.size() && sigma.cols() == gamma.size(),
          ErrorCode::InvalidInput, "sigma dimension mismatch");
  const double denom_sq = gamma.dot(sigma * gamma);
  if (gamma.lpNorm<1>() == 0.0 || denom_sq <= 0.0) return 0.5;
  const double s = std::sqrt(denom_sq);
  Vector mid = 0.5 * (mu1 + mu2);
  const double a = -(mid - mu1).dot(gamma) / s;
  const double c = (mid - mu2).dot(gamma) / s;
  return 1.0 - 0.5 * normal_cdf(a) - 0.5 * normal_cdf(c);
}

}  // namespace ellipstat
