#include "ellipstat/elliptical.hpp"

#include <cmath>

#include "ellipstat/errors.hpp"
#include "ellipstat/linalg.hpp"
#include "ellipstat/rng.hpp"

namespace ellipstat {

EllipticalSpec EllipticalSpec::gaussian(Vector mu, Matrix s) {
  EllipticalSpec spec;
  spec.family = Family::Gaussian;
  spec.location = std::move(mu);
  spec.scatter = std::move(s);
  spec.validate();
  return spec;
}

EllipticalSpec EllipticalSpec::student(double nu, Vector mu, Matrix s) {
  EllipticalSpec spec;
  spec.family = Family::Student;
  spec.nu = nu;
  spec.location = std::move(mu);
  spec.scatter = std::move(s);
  spec.validate();
  return spec;
}

EllipticalSpec EllipticalSpec::scale_mixture(std::vector<double> weights,
                                             std::vector<double> scales, Vector mu,
                                             Matrix s) {
  EllipticalSpec spec;
  spec.family = Family::GaussianScaleMixture;
  spec.mixture_weights = std::move(weights);
  spec.mixture_scales = std::move(scales);
  spec.location = std::move(mu);
  spec.scatter = std::move(s);
  spec.validate();
  return spec;
}

void EllipticalSpec::validate() const {
  require(location.size() >= 1, ErrorCode::InvalidInput, "empty location");
  require(scatter.rows() == location.size() && scatter.cols() == location.size(),
          ErrorCode::InvalidInput, "scatter dimension mismatch");
  require(is_symmetric(scatter, 1e-10), ErrorCode::InvalidInput,
          "scatter must be symmetric");
  EigenSystem es = sym_eigen(scatter);
  require(es.eigenvalues.minCoeff() > 0.0, ErrorCode::InvalidInput,
          "scatter must be positive definite");
  if (family == Family::Student) {
    require(nu > 0.0, ErrorCode::InvalidInput, "student nu must be positive");
  }
  if (family == Family::GaussianScaleMixture) {
    require(!mixture_weights.empty() &&
                mixture_weights.size() == mixture_scales.size(),
            ErrorCode::InvalidInput, "mixture weights/scales mismatch");
    double sum = 0.0;
    for (double w : mixture_weights) {
      require(w >= 0.0, ErrorCode::InvalidInput, "negative mixture weight");
      sum += w;
    }
    require(std::abs(sum - 1.0) <= 1e-10, ErrorCode::InvalidInput,
            "mixture weights must sum to 1");
    for (double s : mixture_scales)
      require(s > 0.0, ErrorCode::InvalidInput, "mixture scales must be positive");
  }
}

Vector spatial_sign(const Vector& x) {
  require(x.allFinite(), ErrorCode::InvalidInput, "non-finite input");
  const double nrm = x.norm();
  if (nrm == 0.0) return Vector::Zero(x.size());
  return x / nrm;
}

Vector spatial_rank(const Vector& x, const DataMatrix& sample) {
  require(sample.rows() >= 1, ErrorCode::InvalidInput, "empty sample");
  require(sample.cols() == x.size(), ErrorCode::InvalidInput, "dimension mismatch");
  Vector acc = Vector::Zero(x.size());
  for (Eigen::Index i = 0; i < sample.rows(); ++i) {
    Vector d = x - sample.row(i).transpose();
    const double nrm = d.norm();
    if (nrm > 0.0) acc += d / nrm;
  }
  return acc / static_cast<double>(sample.rows());
}

DataMatrix sample_elliptical(const EllipticalSpec& spec, Eigen::Index n,
                             std::uint64_t seed) {
  spec.validate();
  require(n >= 1, ErrorCode::InvalidInput, "n must be >= 1");
  const Eigen::Index p = spec.location.size();
  // Symmetric square root keeps the sampler orthogonally equivariant, which
  // the equivariance suite checks up to rotation.
  const Matrix root = sym_sqrt(spec.scatter);

  DataMatrix out(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    Vector g(p);
    for (Eigen::Index j = 0; j < p; ++j) g(j) = rng.normal();
    double scale = 1.0;
    switch (spec.family) {
      case EllipticalSpec::Family::Gaussian:
        break;
      case EllipticalSpec::Family::Student: {
        const double w = rng.chi_square(spec.nu);
        scale = 1.0 / std::sqrt(w / spec.nu);
        break;
      }
      case EllipticalSpec::Family::GaussianScaleMixture: {
        const double u = rng.uniform();
        double acc = 0.0;
        std::size_t k = 0;
        for (; k + 1 < spec.mixture_weights.size(); ++k) {
          acc += spec.mixture_weights[k];
          if (u <= acc) break;
        }
        scale = spec.mixture_scales[k];
        break;
      }
    }
    out.row(i) = (spec.location + scale * (root * g)).transpose();
  }
  return out;
}

RadialMoments radial_moments(const DataMatrix& data, const Vector& center,
                             const Vector& diag_scale) {
  const Eigen::Index n = data.rows();
  require(n >= 1, ErrorCode::InvalidInput, "empty data");
  require(center.size() == data.cols(), ErrorCode::InvalidInput,
          "center dimension mismatch");
  require(diag_scale.size() == data.cols(), ErrorCode::InvalidInput,
          "scale dimension mismatch");
  require(diag_scale.minCoeff() > 0.0, ErrorCode::InvalidInput,
          "scale entries must be positive");

  Vector inv_sd = diag_scale.cwiseSqrt().cwiseInverse();
  Vector radii(n);
  for (Eigen::Index i = 0; i < n; ++i)
    radii(i) = ((data.row(i).transpose() - center).cwiseProduct(inv_sd)).norm();
  const double r_floor = 1e-12 * std::max(radii.maxCoeff(), 1e-300);

  RadialMoments m;
  for (int k = 1; k <= 4; ++k) m.zeta[k] = 0.0;
  m.pos[1] = m.pos[2] = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = radii(i);
    require(r > r_floor, ErrorCode::DegenerateObservation,
            "observation coincides with the center");
    const double ir = 1.0 / r;
    double pw = ir;
    for (int k = 1; k <= 4; ++k) {
      m.zeta[k] += pw;
      pw *= ir;
    }
    m.pos[1] += r;
    m.pos[2] += r * r;
  }
  for (auto& [k, v] : m.zeta) v /= static_cast<double>(n);
  for (auto& [k, v] : m.pos) v /= static_cast<double>(n);
  return m;
}

ConditionalParams conditional_params(const Vector& location, const Matrix& scatter,
                                     Eigen::Index split, const Vector& x2) {
  const Eigen::Index p = location.size();
  require(scatter.rows() == p && scatter.cols() == p, ErrorCode::InvalidInput,
          "scatter dimension mismatch");
  require(split >= 1 && split < p, ErrorCode::InvalidInput,
          "split must satisfy 1 <= q < p");
  require(x2.size() == p - split, ErrorCode::InvalidInput, "x2 dimension mismatch");

  const Eigen::Index q = split;
  Matrix s11 = scatter.topLeftCorner(q, q);
  Matrix s12 = scatter.topRightCorner(q, p - q);
  Matrix s22 = scatter.bottomRightCorner(p - q, p - q);

  Eigen::LDLT<Matrix> ldlt(s22);
  require(ldlt.info() == Eigen::Success && ldlt.isPositive() &&
              ldlt.vectorD().minCoeff() > 1e-300,
          ErrorCode::SingularBlock, "S22 block is singular");

  Vector dev = x2 - location.tail(p - q);
  Vector solve_dev = ldlt.solve(dev);

  ConditionalParams out;
  out.cond_location = location.head(q) + s12 * solve_dev;
  out.cond_scatter = s11 - s12 * ldlt.solve(s12.transpose());
  out.cond_scatter = 0.5 * (out.cond_scatter + out.cond_scatter.transpose());
  out.delta2 = dev.dot(solve_dev);
  return out;
}

}  // namespace ellipstat
