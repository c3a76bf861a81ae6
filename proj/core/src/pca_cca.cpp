#include "ellipstat/pca_cca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ellipstat/errors.hpp"
#include "ellipstat/linalg.hpp"

namespace ellipstat {

namespace {

// Orient each column so its largest-magnitude entry is positive.
void orient_columns(Matrix& basis) {
  for (Eigen::Index j = 0; j < basis.cols(); ++j) {
    Eigen::Index arg = 0;
    basis.col(j).cwiseAbs().maxCoeff(&arg);
    if (basis(arg, j) < 0.0) basis.col(j) = -basis.col(j);
  }
}

void orient_vector(Vector& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

Matrix median_centered_sscm(const DataMatrix& data) {
  SpatialMedian med = spatial_median(data);
  require(med.converged, ErrorCode::NonConvergence,
          "spatial median did not converge");
  return sscm(data, med.theta).matrix;
}

SubspaceEstimate leading_subspace(const Matrix& source_matrix, Eigen::Index r,
                                  const std::string& source) {
  const Eigen::Index p = source_matrix.rows();
  require(r >= 1 && r < p, ErrorCode::InvalidInput, "need 1 <= r < p");
  EigenSystem es = sym_eigen(source_matrix);
  SubspaceEstimate out;
  out.basis = es.eigenvectors.leftCols(r);
  out.eigenvalues = es.eigenvalues.head(r);
  out.source = source;
  out.degenerate_gap = (es.eigenvalues(r - 1) - es.eigenvalues(r)) < 1e-12;
  orient_columns(out.basis);
  return out;
}

// Keep the s largest coordinates by magnitude; ties keep the lower index.
Vector hard_truncate(const Vector& v, Eigen::Index s) {
  const Eigen::Index p = v.size();
  if (s >= p) return v;
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(p));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(v(a)) > std::abs(v(b));
  });
  Vector out = Vector::Zero(p);
  for (Eigen::Index k = 0; k < s; ++k) out(idx[static_cast<std::size_t>(k)]) = v(idx[static_cast<std::size_t>(k)]);
  return out;
}

}  // namespace

SubspaceEstimate spca_subspace(const DataMatrix& data, Eigen::Index r) {
  return leading_subspace(median_centered_sscm(data), r, "sscm");
}

SparseDirection sspca_leading(const DataMatrix& data, Eigen::Index s,
                              const std::optional<Vector>& init, int max_iter,
                              std::vector<double>* objective_trace) {
  const Eigen::Index p = data.cols();
  require(s >= 1 && s <= p, ErrorCode::InvalidInput, "need 1 <= s <= p");
  Matrix m = median_centered_sscm(data);

  Vector v;
  if (init) {
    require(init->size() == p, ErrorCode::InvalidInput, "init dimension mismatch");
    v = *init;
    const double nrm = v.norm();
    require(nrm > 0.0, ErrorCode::InvalidInput, "init must be nonzero");
    v /= nrm;
  } else {
    EigenSystem es = sym_eigen(m);
    v = es.eigenvectors.col(0);
  }
  v = hard_truncate(v, s);
  v /= v.norm();

  SparseDirection out;
  double objective = v.dot(m * v);
  for (int iter = 1; iter <= max_iter; ++iter) {
    Vector w = m * v;
    const double wn = w.norm();
    require(wn > 0.0, ErrorCode::InvalidInput, "matrix annihilated the iterate");
    Vector truncated = hard_truncate(w / wn, s);
    const double tn = truncated.norm();
    require(tn > 0.0, ErrorCode::InvalidInput, "truncation produced a zero vector");
    Vector next = truncated / tn;

    const double cosine = std::min(1.0, std::abs(next.dot(v)));
    const double angle_change = std::sqrt(std::max(0.0, 1.0 - cosine * cosine));
    v = next;
    objective = v.dot(m * v);
    if (objective_trace) objective_trace->push_back(objective);
    out.iterations = iter;
    if (angle_change < 1e-8) {
      out.converged = true;
      break;
    }
  }
  orient_vector(v);
  out.vector = v;
  out.objective = objective;
  out.support_size = (v.array() != 0.0).count();
  return out;
}

SubspaceEstimate gspca_subspace(const DataMatrix& data, GsscmFamily family,
                                Eigen::Index r) {
  SpatialMedian med = spatial_median(data);
  require(med.converged, ErrorCode::NonConvergence,
          "spatial median did not converge");
  Matrix m = gsscm(data, med.theta, family);
  return leading_subspace(m, r, "gsscm");
}

int eigenratio_select(const Vector& eigenvalues, Eigen::Index k_max, bool* floored) {
  require(k_max >= 1 && k_max < eigenvalues.size(), ErrorCode::InvalidInput,
          "need 1 <= Kmax < p");
  if (floored) *floored = false;
  int best_k = 1;
  double best = -1.0;
  for (Eigen::Index j = 1; j <= k_max; ++j) {
    double denom = eigenvalues(j);
    if (denom < 1e-12) {
      denom = 1e-12;
      if (floored) *floored = true;
    }
    const double ratio = eigenvalues(j - 1) / denom;
    if (ratio > best) {  // strict: ties keep the smaller j
      best = ratio;
      best_k = static_cast<int>(j);
    }
  }
  return best_k;
}

FactorNumber factor_number_eigenratio(const DataMatrix& data, Eigen::Index k_max,
                                      const std::string& source) {
  const Eigen::Index p = data.cols();
  require(k_max >= 1 && k_max < p, ErrorCode::InvalidInput, "need 1 <= Kmax < p");

  Matrix m;
  if (source == "sscm") {
    m = median_centered_sscm(data);
  } else if (source == "kendall") {
    m = kendall_tau_matrix(data);
  } else {
    fail(ErrorCode::InvalidInput, "source must be 'sscm' or 'kendall'");
  }

  EigenSystem es = sym_eigen(m);
  FactorNumber out;
  out.k = eigenratio_select(es.eigenvalues, k_max, &out.eigenvalue_floored);
  return out;
}

SubspaceEstimate kendall_factor(const DataMatrix& data, Eigen::Index k) {
  require(data.rows() >= 2, ErrorCode::InvalidInput, "need n >= 2");
  return leading_subspace(kendall_tau_matrix(data), k, "kendall");
}

namespace {

// Scale to the l2 ball, then bisect a soft threshold until the l1 budget
// holds; t = 0 whenever the plain normalization is already feasible.
Vector l1_constrained_direction(const Vector& w, double budget) {
  const double wn = w.norm();
  require(wn > 0.0, ErrorCode::InvalidInput, "zero direction in CCA update");
  Vector unit = w / wn;
  if (unit.lpNorm<1>() <= budget) return unit;

  double lo = 0.0, hi = w.cwiseAbs().maxCoeff();
  Vector best = unit;
  for (int it = 0; it < 80; ++it) {
    const double t = 0.5 * (lo + hi);
    Vector s(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) {
      const double x = w(i);
      s(i) = (x > t) ? x - t : (x < -t ? x + t : 0.0);
    }
    const double sn = s.norm();
    if (sn == 0.0) {
      hi = t;
      continue;
    }
    s /= sn;
    if (s.lpNorm<1>() > budget) {
      lo = t;
    } else {
      hi = t;
      best = s;
    }
  }
  return best;
}

}  // namespace

CCAPair sscca_fit(const DataMatrix& x, const DataMatrix& y, double c_x, double c_y,
                  int max_iter, double eig_floor) {
  const Eigen::Index n = x.rows(), px = x.cols(), py = y.cols();
  require(y.rows() == n, ErrorCode::InvalidInput, "samples must be paired");
  require(c_x >= 1.0 && c_y >= 1.0, ErrorCode::InvalidInput,
          "l1 budgets must be at least 1");

  DataMatrix joint(n, px + py);
  joint << x, y;
  Matrix m = median_centered_sscm(joint);
  Matrix mxx = m.topLeftCorner(px, px);
  Matrix mxy = m.topRightCorner(px, py);
  Matrix myy = m.bottomRightCorner(py, py);

  int floored_x = 0, floored_y = 0;
  Matrix wx = sym_inv_sqrt(mxx, eig_floor, &floored_x);
  Matrix wy = sym_inv_sqrt(myy, eig_floor, &floored_y);
  Matrix k = wx * mxy * wy;

  CCAPair out;
  out.budget_x = c_x;
  out.budget_y = c_y;
  out.ill_conditioned =
      (2 * floored_x >= px) || (2 * floored_y >= py);

  Eigen::JacobiSVD<Matrix> svd(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vector u = l1_constrained_direction(svd.matrixU().col(0), c_x);
  Vector v = l1_constrained_direction(svd.matrixV().col(0), c_y);

  double objective = u.dot(k * v);
  if (objective < 0.0) {
    v = -v;
    objective = -objective;
  }
  for (int iter = 1; iter <= max_iter; ++iter) {
    u = l1_constrained_direction(k * v, c_x);
    v = l1_constrained_direction(k.transpose() * u, c_y);
    const double next = u.dot(k * v);
    out.iterations = iter;
    if (std::abs(next - objective) < 1e-8) {
      objective = next;
      out.converged = true;
      break;
    }
    objective = next;
  }
  orient_vector(u);
  orient_vector(v);
  out.u = u;
  out.v = v;
  out.rho = std::abs(u.dot(k * v));
  return out;
}

}  // namespace ellipstat
