// Acceptance suite: one check per criterion, each printing a PASS/FAIL line
// with the measured quantity and its required band. Run with no arguments for
// the full battery or with criterion numbers (1..13) for a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ellipstat/calibration.hpp"
#include "ellipstat/elliptical.hpp"
#include "ellipstat/errors.hpp"
#include "ellipstat/estimators.hpp"
#include "ellipstat/linalg.hpp"
#include "ellipstat/location_tests.hpp"
#include "ellipstat/matrix_tests.hpp"
#include "ellipstat/pca_cca.hpp"
#include "ellipstat/rng.hpp"
#include "ellipstat/scenario.hpp"
#include "ellipstat/simulate.hpp"
#include "ellipstat/sparse_opt.hpp"

using namespace ellipstat;

namespace {

int worker_threads() {
  if (const char* env = std::getenv("ELLIPSTAT_THREADS"))
    return std::max(1, std::atoi(env));
  return std::max(1u, std::thread::hardware_concurrency());
}

// Deterministic parallel map over replication indices.
template <typename F>
std::vector<double> parallel_reps(int reps, F&& body) {
  std::vector<double> out(static_cast<std::size_t>(reps), 0.0);
  const int threads = std::min(worker_threads(), reps);
  std::vector<std::thread> pool;
  const int chunk = (reps + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int first = t * chunk;
    const int last = std::min(reps, first + chunk);
    if (first >= last) break;
    pool.emplace_back([&, first, last]() {
      for (int r = first; r < last; ++r) out[static_cast<std::size_t>(r)] = body(r);
    });
  }
  for (std::thread& th : pool) th.join();
  return out;
}

double rejection_rate(const std::vector<double>& pvalues, double alpha = 0.05) {
  int rejected = 0;
  for (double p : pvalues)
    if (p < alpha) ++rejected;
  return static_cast<double>(rejected) / static_cast<double>(pvalues.size());
}

double ks_uniform(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double n = static_cast<double>(values.size());
  double d = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    d = std::max(d, std::abs((static_cast<double>(i) + 1.0) / n - values[i]));
    d = std::max(d, std::abs(values[i] - static_cast<double>(i) / n));
  }
  return d;
}

EllipticalSpec null_spec(const std::string& family, Eigen::Index p,
                         const Matrix* scatter = nullptr) {
  Matrix s = scatter ? *scatter : Matrix::Identity(p, p);
  if (family == "gaussian") return EllipticalSpec::gaussian(Vector::Zero(p), s);
  if (family == "t4") return EllipticalSpec::student(4.0, Vector::Zero(p), s);
  if (family == "t3") return EllipticalSpec::student(3.0, Vector::Zero(p), s);
  fail(ErrorCode::InvalidInput, "unknown family " + family);
}

struct CheckContext {
  bool ok = true;
  std::ostringstream details;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      details << "    violated: " << what << "\n";
    }
  }
  void note(const std::string& line) { details << "    " << line << "\n"; }
};

// ---------------------------------------------------------------------------
// 1. Null-size battery
// ---------------------------------------------------------------------------

bool criterion_size_battery(CheckContext& ctx) {
  struct OneSample {
    const char* label;
    std::function<double(const DataMatrix&)> pvalue;
    Eigen::Index n, p;
    int reps;
    double lo, hi;
  };
  Vector mu0_cache;  // sized per case below

  const int reps_main = 2000;
  std::vector<OneSample> cases = {
      {"one_sample_sign",
       [](const DataMatrix& x) {
         return one_sample_sign_test(x, Vector::Zero(x.cols())).pvalue;
       },
       60, 50, reps_main, 0.03, 0.07},
      {"inst",
       [](const DataMatrix& x) {
         return inst_test(x, Vector::Zero(x.cols())).pvalue;
       },
       60, 50, reps_main, 0.03, 0.07},
      {"sphericity_sign",
       [](const DataMatrix& x) { return sphericity_sign_test(x).result.pvalue; },
       60, 40, reps_main, 0.03, 0.07},
      {"max_sign",
       [](const DataMatrix& x) {
         return max_sign_test(x, Vector::Zero(x.cols())).pvalue;
       },
       100, 200, 1000, 0.02, 0.08},
      {"sphericity_max",
       [](const DataMatrix& x) { return sphericity_max_test(x).pvalue; },
       200, 50, 1000, 0.02, 0.08},
      {"sphericity_rank_spearman",
       [](const DataMatrix& x) { return sphericity_rank_spearman(x).pvalue; },
       30, 20, 400, 0.02, 0.08},
      {"sphericity_rank_kendall",
       [](const DataMatrix& x) { return sphericity_rank_kendall(x).pvalue; },
       30, 20, 400, 0.02, 0.08},
  };

  std::uint64_t seed_base = 100000;
  for (const OneSample& c : cases) {
    for (const std::string family : {"gaussian", "t4"}) {
      EllipticalSpec spec = null_spec(family, c.p);
      std::vector<double> pvals = parallel_reps(c.reps, [&](int r) {
        DataMatrix x =
            sample_elliptical(spec, c.n, derive_seed(seed_base, r, 17));
        return c.pvalue(x);
      });
      const double size = rejection_rate(pvals);
      ctx.note(std::string(c.label) + " / " + family +
               ": size = " + std::to_string(size) + " (band [" +
               std::to_string(c.lo) + ", " + std::to_string(c.hi) + "])");
      ctx.expect(size >= c.lo && size <= c.hi,
                 std::string(c.label) + " / " + family + " size out of band");
      seed_base += 1000;
    }
  }

  struct TwoSample {
    const char* label;
    std::function<double(const DataMatrix&, const DataMatrix&)> pvalue;
    Eigen::Index n1, n2, p;
    int reps;
    double lo, hi;
  };
  std::vector<TwoSample> two_cases = {
      {"sst_two_sample",
       [](const DataMatrix& a, const DataMatrix& b) {
         return sst_two_sample(a, b).pvalue;
       },
       50, 50, 40, reps_main, 0.03, 0.07},
      {"sscm_equality",
       [](const DataMatrix& a, const DataMatrix& b) {
         return sscm_equality_test(a, b).pvalue;
       },
       50, 50, 40, reps_main, 0.03, 0.07},
      {"cq_two_sample",
       [](const DataMatrix& a, const DataMatrix& b) {
         return cq_two_sample(a, b).pvalue;
       },
       50, 50, 40, reps_main, 0.03, 0.07},
      {"rank_two_sample",
       [](const DataMatrix& a, const DataMatrix& b) {
         return rank_two_sample(a, b, /*exact_leave_out=*/true).pvalue;
       },
       20, 20, 40, 500, 0.02, 0.08},
      {"proportionality",
       [](const DataMatrix& a, const DataMatrix& b) {
         return proportionality_test(a, b).pvalue;
       },
       30, 30, 20, 400, 0.02, 0.08},
  };
  for (const TwoSample& c : two_cases) {
    for (const std::string family : {"gaussian", "t4"}) {
      EllipticalSpec spec = null_spec(family, c.p);
      std::vector<double> pvals = parallel_reps(c.reps, [&](int r) {
        DataMatrix a =
            sample_elliptical(spec, c.n1, derive_seed(seed_base, r, 31));
        DataMatrix b =
            sample_elliptical(spec, c.n2, derive_seed(seed_base, r, 37));
        return c.pvalue(a, b);
      });
      const double size = rejection_rate(pvals);
      ctx.note(std::string(c.label) + " / " + family +
               ": size = " + std::to_string(size) + " (band [" +
               std::to_string(c.lo) + ", " + std::to_string(c.hi) + "])");
      ctx.expect(size >= c.lo && size <= c.hi,
                 std::string(c.label) + " / " + family + " size out of band");
      seed_base += 1000;
    }
  }
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 2. Gumbel calibration for maxima of squared normals
// ---------------------------------------------------------------------------

bool criterion_gumbel(CheckContext& ctx) {
  const int reps = 2000;
  const long p = 2000;
  std::vector<double> pit = parallel_reps(reps, [&](int r) {
    Rng rng(derive_seed(1, r, 3));
    double max_sq = 0.0;
    for (long j = 0; j < p; ++j) {
      const double z = rng.normal();
      max_sq = std::max(max_sq, z * z);
    }
    // PIT under the limit law: uniform when the calibration is correct.
    return 1.0 - gumbel_pvalue(max_sq, p);
  });
  const double ks = ks_uniform(pit);
  ctx.note("KS distance to the limit law = " + std::to_string(ks));
  ctx.expect(ks < 0.05, "KS >= 0.05");
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 3. Combination rules map independent uniforms to uniforms
// ---------------------------------------------------------------------------

bool criterion_combination_uniformity(CheckContext& ctx) {
  const int reps = 10000;
  Rng rng(777001);
  std::vector<double> cauchy_out, fisher_out;
  cauchy_out.reserve(reps);
  fisher_out.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    cauchy_out.push_back(cauchy_combine(u, v));
    fisher_out.push_back(fisher_combine(u, v));
  }
  const double ks_c = ks_uniform(cauchy_out);
  const double ks_f = ks_uniform(fisher_out);
  ctx.note("cauchy KS = " + std::to_string(ks_c) +
           ", fisher KS = " + std::to_string(ks_f));
  ctx.expect(ks_c < 0.02, "cauchy KS >= 0.02");
  ctx.expect(ks_f < 0.02, "fisher KS >= 0.02");
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 4. Radial efficiency factor under spherical t3
// ---------------------------------------------------------------------------

double simpson_integrate(const std::function<double(double)>& f, double a,
                         double b, int intervals) {
  double acc = f(a) + f(b);
  for (int k = 1; k < intervals; ++k) {
    const double x = a + (b - a) * k / intervals;
    acc += f(x) * ((k % 2) ? 4.0 : 2.0);
  }
  return acc * (b - a) / (3.0 * intervals);
}

bool criterion_are(CheckContext& ctx) {
  const Eigen::Index p = 200, n = 10000;
  const double nu = 3.0;
  EllipticalSpec spec =
      EllipticalSpec::student(nu, Vector::Zero(p), Matrix::Identity(p, p));
  DataMatrix x = sample_elliptical(spec, n, 515151);
  RadialMoments m = radial_moments(x, Vector::Zero(p), Vector::Ones(p));
  const double estimate = m.zeta.at(1) * m.zeta.at(1) * m.pos.at(2);

  // Quadrature oracle from the chi_p and chi^2_nu factors of the radial law.
  const double log_norm_g = std::lgamma(static_cast<double>(p) / 2.0) +
                            (static_cast<double>(p) / 2.0 - 1.0) * std::log(2.0);
  auto chi_p_moment = [&](double power) {
    return simpson_integrate(
        [&](double t) {
          if (t <= 0.0) return 0.0;
          const double log_density =
              (static_cast<double>(p) - 1.0) * std::log(t) - t * t / 2.0 -
              log_norm_g;
          return std::exp(log_density + power * std::log(t));
        },
        1e-8, 40.0, 20000);
  };
  const double log_norm_w = std::lgamma(nu / 2.0) + (nu / 2.0) * std::log(2.0);
  auto chisq_moment = [&](double power) {
    // substitute w = s^2 so the w^{-1/2}-type endpoint singularity vanishes
    return simpson_integrate(
        [&](double s) {
          if (s <= 0.0) return 0.0;
          const double w = s * s;
          const double log_density =
              (nu / 2.0 - 1.0) * std::log(w) - w / 2.0 - log_norm_w;
          return 2.0 * s * std::exp(log_density + power * std::log(w));
        },
        0.0, 10.0, 40000);
  };
  const double inv_r = chi_p_moment(-1.0) * chisq_moment(0.5) / std::sqrt(nu);
  const double r_sq = static_cast<double>(p) * nu * chisq_moment(-1.0);
  const double oracle = inv_r * inv_r * r_sq;
  const double limit = 8.0 / M_PI;

  ctx.note("monte carlo = " + std::to_string(estimate) +
           ", quadrature oracle = " + std::to_string(oracle) +
           ", limit 8/pi = " + std::to_string(limit));
  ctx.expect(std::abs(estimate - limit) / limit < 0.10,
             "estimate not within 10% of 8/pi");
  ctx.expect(std::abs(estimate - oracle) / oracle < 0.10,
             "estimate not within 10% of the quadrature oracle");
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 5. Equivariance suite
// ---------------------------------------------------------------------------

bool criterion_equivariance(CheckContext& ctx) {
  Rng rng(616161);
  const Eigen::Index p = 4, n = 60;
  EllipticalSpec spec =
      EllipticalSpec::student(4.0, Vector::Zero(p), Matrix::Identity(p, p));
  DataMatrix x = sample_elliptical(spec, n, 626262);

  // spatial median: translation and rotation
  Vector b(p);
  b << 3.0, -1.0, 0.25, 7.0;
  Vector base = spatial_median(x).theta;
  Vector shifted = spatial_median(x.rowwise() + b.transpose()).theta;
  ctx.expect((shifted - base - b).cwiseAbs().maxCoeff() <= 1e-6,
             "spatial median translation equivariance");

  Matrix q = Matrix::Identity(p, p);
  {
    DataMatrix g = sample_elliptical(spec, p, 636363);
    Eigen::HouseholderQR<Matrix> qr(g.transpose() * g + Matrix::Identity(p, p));
    q = qr.householderQ();
  }
  Vector rotated = spatial_median(x * q.transpose()).theta;
  ctx.expect((rotated - q * base).cwiseAbs().maxCoeff() <= 1e-6,
             "spatial median rotation equivariance");

  // tyler: scale invariance and affine equivariance up to trace normalization
  ShapeEstimate t_base = tyler(x, Vector::Zero(p), 1e-10, 5000);
  ShapeEstimate t_scaled = tyler(2.25 * x, Vector::Zero(p), 1e-10, 5000);
  ctx.expect((t_base.shape - t_scaled.shape).cwiseAbs().maxCoeff() <= 1e-8,
             "tyler scale invariance");
  Matrix bmat(p, p);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j) bmat(i, j) = rng.normal();
  bmat += 3.0 * Matrix::Identity(p, p);
  ShapeEstimate t_mapped = tyler(x * bmat.transpose(), Vector::Zero(p), 1e-10, 5000);
  Matrix target = bmat * t_base.shape * bmat.transpose();
  target *= static_cast<double>(p) / target.trace();
  ctx.expect((t_mapped.shape - target).norm() / target.norm() <= 1e-6,
             "tyler affine equivariance");

  // HR affine equivariance
  HREstimate hr_base = hr_estimator(x, 1e-10, 5000);
  Vector a(p);
  a << -2.0, 0.5, 1.0, 3.0;
  DataMatrix y = (x * bmat.transpose()).rowwise() + a.transpose();
  HREstimate hr_mapped = hr_estimator(y, 1e-10, 5000);
  ctx.expect(
      (hr_mapped.location - (a + bmat * hr_base.location)).cwiseAbs().maxCoeff() <=
          1e-5,
      "hr location affine equivariance");
  Matrix hr_target = bmat * hr_base.shape.shape * bmat.transpose();
  hr_target *= static_cast<double>(p) / hr_target.trace();
  ctx.expect((hr_mapped.shape.shape - hr_target).norm() / hr_target.norm() <= 1e-5,
             "hr shape affine equivariance");

  // proportionality scale invariance (exact)
  DataMatrix d1 = sample_elliptical(spec, 12, 646464);
  DataMatrix d2 = sample_elliptical(spec, 14, 656565);
  const double prop_base = proportionality_test(d1, d2).statistic;
  const double prop_scaled = proportionality_test(5.5 * d1, d2).statistic;
  ctx.expect(std::abs(prop_base - prop_scaled) <= 1e-10,
             "proportionality scale invariance");

  // Kendall matrix translation invariance (exact up to input rounding)
  Matrix k_base = kendall_tau_matrix(d1);
  Matrix k_shift = kendall_tau_matrix(d1.rowwise() + b.transpose());
  ctx.expect((k_base - k_shift).cwiseAbs().maxCoeff() <= 1e-12,
             "kendall translation invariance");
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 6. Structural exactness
// ---------------------------------------------------------------------------

bool criterion_structure(CheckContext& ctx) {
  const Eigen::Index p = 6, n = 80;
  EllipticalSpec spec =
      EllipticalSpec::student(4.0, Vector::Zero(p), Matrix::Identity(p, p));
  DataMatrix x = sample_elliptical(spec, n, 676767);

  SSCMEstimate s = sscm(x, spatial_median(x).theta);
  ctx.expect(std::abs(s.matrix.trace() - 1.0) <= 1e-10, "tr(SSCM) = 1");

  Matrix k = kendall_tau_matrix(x);
  ctx.expect(std::abs(k.trace() - 1.0) <= 1e-10, "tr(Kendall) = 1");

  ShapeEstimate t = tyler(x, Vector::Zero(p));
  ctx.expect(t.converged, "tyler convergence");
  ctx.expect(std::abs(t.shape.trace() - static_cast<double>(p)) <= 1e-10,
             "tr(Tyler) = p");
  ctx.expect(t.residual <= kDefaultTol, "tyler fixed-point residual");

  HREstimate hr = hr_estimator(x);
  ctx.expect(hr.converged, "hr convergence");
  ctx.expect(std::abs(hr.shape.shape.trace() - static_cast<double>(p)) <= 1e-10,
             "tr(HR shape) = p");
  ctx.expect(hr.location_residual <= kDefaultTol, "hr location residual");
  ctx.expect(hr.shape_residual <= kDefaultTol, "hr shape residual");

  LocationScale ls = scaled_spatial_median(x);
  ctx.expect(ls.converged, "scaled median convergence");
  ctx.expect(ls.location_residual <= kDefaultTol, "scaled median score residual");
  ctx.expect(ls.scale_residual <= kDefaultTol, "scaled median scale residual");

  SpatialMedian med = spatial_median(x);
  ctx.expect(med.converged && (med.at_data_point || med.residual <= kDefaultTol),
             "spatial median residual");
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 7. Oracle equivalence on tiny instances
// ---------------------------------------------------------------------------

bool criterion_tiny_oracles(CheckContext& ctx) {
  EllipticalSpec spec =
      EllipticalSpec::student(4.0, Vector::Zero(3), Matrix::Identity(3, 3));
  DataMatrix a = sample_elliptical(spec, 8, 686868);
  DataMatrix b = sample_elliptical(spec, 8, 696969);

  auto pair_sign = [](const DataMatrix& x, int i, int j) {
    Vector d = (x.row(i) - x.row(j)).transpose();
    return Vector(d / d.norm());
  };

  {  // trace estimator vs triple loop (n = 6)
    DataMatrix x = a.topRows(6);
    double oracle = 0.0;
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        for (int k = 0; k < 6; ++k) {
          if (i == j || j == k || i == k) continue;
          oracle += (x.row(i) - x.row(j)).dot(x.row(k) - x.row(j));
        }
    oracle /= 6.0 * 5.0 * 4.0;
    ctx.expect(std::abs(trace_estimator(x) - oracle) <= 1e-10,
               "trace estimator = triple loop");
  }

  {  // CQ statistic vs explicit sums (n1 = n2 = 5)
    DataMatrix x = a.topRows(5), y = b.topRows(5);
    double w1 = 0.0, w2 = 0.0, cr = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        if (i != j) {
          w1 += x.row(i).dot(x.row(j));
          w2 += y.row(i).dot(y.row(j));
        }
        cr += x.row(i).dot(y.row(j));
      }
    const double oracle = w1 / 20.0 + w2 / 20.0 - 2.0 * cr / 25.0;
    ctx.expect(std::abs(cq_two_sample(x, y).nuisance.at("raw_statistic") -
                        oracle) <= 1e-10,
               "cq statistic = explicit loops");
  }

  {  // rank two-sample vs quadruple loop (n1 = n2 = 5, pooled scale)
    DataMatrix x = a.topRows(5), y = b.topRows(5);
    LocationScale l1 = scaled_spatial_median(x);
    LocationScale l2 = scaled_spatial_median(y);
    Vector pooled = 0.5 * (l1.diag_scale + l2.diag_scale);
    Vector inv_sd = pooled.cwiseSqrt().cwiseInverse();
    double acc = 0.0;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        if (i == j) continue;
        for (int s = 0; s < 5; ++s)
          for (int l = 0; l < 5; ++l) {
            if (s == l) continue;
            Vector u = (x.row(i) - y.row(s)).transpose().cwiseProduct(inv_sd);
            Vector v = (x.row(j) - y.row(l)).transpose().cwiseProduct(inv_sd);
            acc += u.normalized().dot(v.normalized());
          }
      }
    const double oracle = acc / 400.0;
    ctx.expect(std::abs(rank_two_sample(x, y).nuisance.at("raw_statistic") -
                        oracle) <= 1e-10,
               "rank statistic = quadruple loop");
  }

  {  // proportionality components vs loops (n1 = n2 = 6)
    DataMatrix x = a.topRows(6), y = b.topRows(6);
    auto quadruple = [&](const DataMatrix& z) {
      double acc = 0.0;
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          if (j == i) continue;
          for (int k = 0; k < 6; ++k) {
            if (k == i || k == j) continue;
            for (int l = 0; l < 6; ++l) {
              if (l == i || l == j || l == k) continue;
              const double d = pair_sign(z, i, j).dot(pair_sign(z, k, l));
              acc += d * d;
            }
          }
        }
      return 3.0 * acc / (6.0 * 5.0 * 4.0 * 3.0);
    };
    TestResult res = proportionality_test(x, y);
    ctx.expect(std::abs(res.nuisance.at("A1") - quadruple(x)) <= 1e-10,
               "proportionality A1 = quadruple loop");
    ctx.expect(std::abs(res.nuisance.at("A2") - quadruple(y)) <= 1e-10,
               "proportionality A2 = quadruple loop");
  }

  {  // rank sphericity statistics vs loops (n = 8)
    DataMatrix x = a;
    double kendall_acc = 0.0, spearman_acc = 0.0;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        if (j == i) continue;
        for (int k = 0; k < 8; ++k) {
          if (k == i || k == j) continue;
          for (int l = 0; l < 8; ++l) {
            if (l == i || l == j || l == k) continue;
            const double d = pair_sign(x, i, j).dot(pair_sign(x, k, l));
            kendall_acc += d * d;
            spearman_acc += d * pair_sign(x, k, j).dot(pair_sign(x, i, l));
          }
        }
      }
    const double count = 8.0 * 7.0 * 6.0 * 5.0;
    const double kendall_oracle = 3.0 * kendall_acc / count - 1.0;
    const double spearman_oracle = 12.0 * spearman_acc / (2.0 * count) - 1.0;
    ctx.expect(std::abs(sphericity_rank_kendall(x).nuisance.at("raw_statistic") -
                        kendall_oracle) <= 1e-10,
               "kendall sphericity = quadruple loop");
    ctx.expect(std::abs(sphericity_rank_spearman(x).nuisance.at("raw_statistic") -
                        spearman_oracle) <= 1e-10,
               "spearman sphericity = quadruple loop");
  }
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 8. Eigenvector preservation at scale
// ---------------------------------------------------------------------------

bool criterion_eigenvector_preservation(CheckContext& ctx) {
  const Eigen::Index n = 10000, p = 10;
  Matrix shape = Matrix::Identity(p, p);
  shape(0, 0) = 4.0;
  EllipticalSpec spec = EllipticalSpec::student(4.0, Vector::Zero(p), shape);
  DataMatrix x = sample_elliptical(spec, n, 717171);

  Vector e1 = Vector::Unit(p, 0);
  Matrix sscm_mat = sscm(x, spatial_median(x).theta).matrix;
  Matrix kendall_mat = kendall_tau_matrix(x);
  Vector sscm_lead = sym_eigen(sscm_mat).eigenvectors.col(0);
  Vector kendall_lead = sym_eigen(kendall_mat).eigenvectors.col(0);

  auto sin_angle = [](const Vector& u, const Vector& v) {
    const double c = std::min(1.0, std::abs(u.normalized().dot(v.normalized())));
    return std::sqrt(1.0 - c * c);
  };
  const double s1 = sin_angle(sscm_lead, e1);
  const double s2 = sin_angle(kendall_lead, e1);
  ctx.note("sscm sin = " + std::to_string(s1) +
           ", kendall sin = " + std::to_string(s2));
  ctx.expect(s1 < 0.05, "sscm leading eigenvector misaligned");
  ctx.expect(s2 < 0.05, "kendall leading eigenvector misaligned");

  // under a diagonal shape both estimates stay nearly diagonal
  const double bound = 5.0 / std::sqrt(static_cast<double>(n));
  double off1 = 0.0, off2 = 0.0;
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < p; ++j)
      if (i != j) {
        off1 = std::max(off1, std::abs(sscm_mat(i, j)));
        off2 = std::max(off2, std::abs(kendall_mat(i, j)));
      }
  ctx.expect(off1 < bound, "sscm off-diagonal entries too large");
  ctx.expect(off2 < bound, "kendall off-diagonal entries too large");
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 9. SCLIME signed support recovery
// ---------------------------------------------------------------------------

bool criterion_sclime_recovery(CheckContext& ctx) {
  const Eigen::Index p = 50, n = 400;
  Matrix omega = Matrix::Identity(p, p);
  for (Eigen::Index i = 0; i + 1 < p; ++i) omega(i, i + 1) = omega(i + 1, i) = 0.4;
  Matrix scatter = omega.inverse();
  EllipticalSpec spec = EllipticalSpec::student(4.0, Vector::Zero(p), scatter);
  const double lambda = 2.0 * (std::sqrt(std::log(static_cast<double>(p)) /
                                         static_cast<double>(n)) +
                               1.0 / std::sqrt(static_cast<double>(p)));

  std::vector<double> successes = parallel_reps(50, [&](int r) {
    DataMatrix x = sample_elliptical(spec, n, derive_seed(727272, r, 5));
    SpatialMedian med = spatial_median(x);
    Matrix g = static_cast<double>(p) * sscm(x, med.theta).matrix;
    Matrix v = sclime(g, lambda);
    Eigen::MatrixXi pattern = threshold_support(v, lambda);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = 0; j < p; ++j) {
        const bool truth = omega(i, j) != 0.0;
        if ((pattern(i, j) != 0) != truth) return 0.0;
        if (truth && pattern(i, j) != 0 &&
            ((v(i, j) > 0.0) != (omega(i, j) > 0.0)))
          return 0.0;
      }
    return 1.0;
  });
  double rate = 0.0;
  for (double s : successes) rate += s;
  rate /= static_cast<double>(successes.size());
  ctx.note("signed-support recovery rate = " + std::to_string(rate) +
           " at lambda = tau = " + std::to_string(lambda));
  if (rate < 0.9) {
    // Diagnostic context for the failure mode: the inverse-shape target is
    // omega * tr(omega^{-1})/p, so the smallest nonzero magnitude is fixed by
    // the scenario itself and can sit below 2*tau.
    const double theta_min = 0.4 * scatter.trace() / static_cast<double>(p);
    ctx.note("scenario theta_min = " + std::to_string(theta_min) +
             " vs 2*tau = " + std::to_string(2.0 * lambda) +
             "; l1 shrinkage pulls true off-diagonals below tau while false "
             "positives stay at zero");
  }
  ctx.expect(rate >= 0.9, "recovery rate below 0.9");
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 10. SSLDA risk against the exact benchmark
// ---------------------------------------------------------------------------

bool criterion_sslda_risk(CheckContext& ctx) {
  const Eigen::Index n = 200, p = 100, n_test = 2000;
  const double bayes = normal_cdf(-1.5);
  Vector delta = Vector::Zero(p);
  delta.head(5).setConstant(3.0 / std::sqrt(5.0));  // Delta_F = 3
  Vector mu1 = 0.5 * delta, mu2 = -0.5 * delta;
  EllipticalSpec s1 = EllipticalSpec::gaussian(mu1, Matrix::Identity(p, p));
  EllipticalSpec s2 = EllipticalSpec::gaussian(mu2, Matrix::Identity(p, p));

  std::vector<double> errors = parallel_reps(20, [&](int r) {
    DataMatrix d1 = sample_elliptical(s1, n, derive_seed(737373, r, 11));
    DataMatrix d2 = sample_elliptical(s2, n, derive_seed(737373, r, 13));
    LDAModel model = sslda_fit(d1, d2);
    DataMatrix t1 = sample_elliptical(s1, n_test, derive_seed(747474, r, 11));
    DataMatrix t2 = sample_elliptical(s2, n_test, derive_seed(747474, r, 13));
    int wrong = 0;
    for (Eigen::Index i = 0; i < n_test; ++i) {
      if (sslda_predict(model, t1.row(i).transpose()) != 1) ++wrong;
      if (sslda_predict(model, t2.row(i).transpose()) != 2) ++wrong;
    }
    return static_cast<double>(wrong) / (2.0 * static_cast<double>(n_test));
  });
  std::sort(errors.begin(), errors.end());
  const double median_error = 0.5 * (errors[9] + errors[10]);
  ctx.note("median test error = " + std::to_string(median_error) +
           ", exact benchmark = " + std::to_string(bayes));
  ctx.expect(std::abs(median_error - bayes) <= 0.02,
             "median misclassification not within 0.02 of the benchmark");
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 11. Eigenratio factor number
// ---------------------------------------------------------------------------

bool criterion_eigenratio(CheckContext& ctx) {
  const Eigen::Index n = 500, p = 100;
  Matrix shape = Matrix::Identity(p, p);
  for (int k = 0; k < 3; ++k) shape(k, k) = static_cast<double>(p);
  EllipticalSpec spec = EllipticalSpec::student(4.0, Vector::Zero(p), shape);

  int hits_sscm = 0, hits_kendall = 0;
  std::vector<double> results = parallel_reps(100, [&](int r) {
    DataMatrix x = sample_elliptical(spec, n, derive_seed(757575, r, 7));
    const int k_s = factor_number_eigenratio(x, 8, "sscm").k;
    const int k_k = factor_number_eigenratio(x, 8, "kendall").k;
    return static_cast<double>((k_s == 3 ? 1 : 0) + 2 * (k_k == 3 ? 1 : 0));
  });
  for (double v : results) {
    const int enc = static_cast<int>(v);
    hits_sscm += enc & 1;
    hits_kendall += (enc >> 1) & 1;
  }
  ctx.note("sscm hits = " + std::to_string(hits_sscm) + "/100, kendall hits = " +
           std::to_string(hits_kendall) + "/100");
  ctx.expect(hits_sscm >= 95, "sscm eigenratio below 95%");
  ctx.expect(hits_kendall >= 95, "kendall eigenratio below 95%");
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 12. Planted sparse recovery for SSPCA and SSCCA
// ---------------------------------------------------------------------------

bool criterion_sparse_recovery(CheckContext& ctx) {
  {  // SSPCA: 5-sparse leading direction, spike ratio 4
    const Eigen::Index n = 500, p = 200;
    Vector v1 = Vector::Zero(p);
    for (int j = 0; j < 5; ++j) v1(j) = 1.0 / std::sqrt(5.0);
    Matrix shape = Matrix::Identity(p, p);
    shape += 3.0 * v1 * v1.transpose();
    EllipticalSpec spec = EllipticalSpec::gaussian(Vector::Zero(p), shape);

    std::vector<double> hits = parallel_reps(50, [&](int r) {
      DataMatrix x = sample_elliptical(spec, n, derive_seed(767676, r, 3));
      SparseDirection dir = sspca_leading(x, 5);
      for (int j = 0; j < 5; ++j)
        if (dir.vector(j) == 0.0) return 0.0;
      for (Eigen::Index j = 5; j < p; ++j)
        if (dir.vector(j) != 0.0) return 0.0;
      return 1.0;
    });
    double rate = 0.0;
    for (double h : hits) rate += h;
    rate /= 50.0;
    ctx.note("sspca support recovery rate = " + std::to_string(rate));
    ctx.expect(rate >= 0.8, "sspca support recovery below 0.8");
  }

  {  // SSCCA: planted 5-sparse canonical pair with rho = 0.9
    const Eigen::Index n = 500, px = 100, py = 100;
    Vector u = Vector::Zero(px), v = Vector::Zero(py);
    for (int j = 0; j < 5; ++j) {
      u(j) = 1.0 / std::sqrt(5.0);
      v(j + 3) = 1.0 / std::sqrt(5.0);
    }
    Matrix joint = Matrix::Identity(px + py, px + py);
    joint.topRightCorner(px, py) = 0.9 * u * v.transpose();
    joint.bottomLeftCorner(py, px) = 0.9 * v * u.transpose();
    EllipticalSpec spec = EllipticalSpec::gaussian(Vector::Zero(px + py), joint);

    auto sin_angle = [](const Vector& a, const Vector& b) {
      const double c = std::min(1.0, std::abs(a.normalized().dot(b.normalized())));
      return std::sqrt(1.0 - c * c);
    };
    std::vector<double> errs = parallel_reps(50, [&](int r) {
      DataMatrix z = sample_elliptical(spec, n, derive_seed(787878, r, 9));
      CCAPair pair = sscca_fit(z.leftCols(px), z.rightCols(py),
                               std::sqrt(5.0) + 0.4, std::sqrt(5.0) + 0.4);
      return sin_angle(pair.u, u) + sin_angle(pair.v, v);
    });
    std::sort(errs.begin(), errs.end());
    const double median_err = 0.5 * (errs[24] + errs[25]);
    ctx.note("sscca median angle error = " + std::to_string(median_err));
    ctx.expect(median_err < 0.6, "sscca median angle error not below 0.6");
  }
  return ctx.ok;
}

// ---------------------------------------------------------------------------
// 13. Byte-identical simulate output across thread counts
// ---------------------------------------------------------------------------

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool criterion_determinism(CheckContext& ctx) {
  const char* config_text = R"({
    "distribution": {"family": "student", "nu": 4.0},
    "n": 40, "p": 12,
    "sigma_structure": {"type": "ar1", "rho": 0.3},
    "tests": [{"name": "one_sample_sign"}, {"name": "maxsum"},
              {"name": "sphericity_sign"}],
    "reps": 60, "alpha": 0.05, "seed": 2718, "threads": 1
  })";

  // Library-level determinism.
  ScenarioConfig cfg = parse_scenario(config_text);
  SimulationOutput serial = run_simulation(cfg, 1);
  SimulationOutput parallel = run_simulation(cfg, 8);
  ctx.expect(results_to_csv(serial) == results_to_csv(parallel),
             "library CSV differs across thread counts");
  ctx.expect(results_to_json(serial, cfg) == results_to_json(parallel, cfg),
             "library JSON differs across thread counts");

  // CLI-level determinism when the binary location is known.
  if (const char* cli = std::getenv("ELLIPSTAT_CLI")) {
    namespace fs = std::filesystem;
    fs::path work = fs::temp_directory_path() / "ellipstat_determinism";
    fs::remove_all(work);
    fs::create_directories(work);
    std::ofstream(work / "config.json") << config_text;

    auto run = [&](const std::string& out, int threads) {
      std::ostringstream cmd;
      cmd << '"' << cli << '"' << " simulate --config "
          << (work / "config.json") << " --out " << (work / out)
          << " --threads " << threads << " > /dev/null 2>&1";
      return std::system(cmd.str().c_str());
    };
    ctx.expect(run("t1", 1) == 0, "cli simulate (1 thread) failed");
    ctx.expect(run("t8", 8) == 0, "cli simulate (8 threads) failed");
    ctx.expect(slurp(work / "t1" / "results.csv") ==
                   slurp(work / "t8" / "results.csv"),
               "cli results.csv differs across thread counts");
    ctx.expect(slurp(work / "t1" / "results.json") ==
                   slurp(work / "t8" / "results.json"),
               "cli results.json differs across thread counts");
  } else {
    ctx.note("ELLIPSTAT_CLI not set; checked the library path only");
  }
  return ctx.ok;
}

struct Criterion {
  int id;
  const char* label;
  std::function<bool(CheckContext&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "null-size battery (five tests at [0.03,0.07], max/quadruple at [0.02,0.08])",
       criterion_size_battery},
      {2, "extreme-value calibration of squared-normal maxima (KS < 0.05)",
       criterion_gumbel},
      {3, "cauchy/fisher combinations preserve uniformity (KS < 0.02)",
       criterion_combination_uniformity},
      {4, "radial efficiency factor under spherical t3 within 10% of 8/pi",
       criterion_are},
      {5, "equivariance suite (median, tyler, hr, proportionality, kendall)",
       criterion_equivariance},
      {6, "structural exactness (traces and residual contracts)",
       criterion_structure},
      {7, "tiny-instance oracle equivalence (brute-force loops)",
       criterion_tiny_oracles},
      {8, "sscm/kendall leading-eigenvector alignment at n = 10^4",
       criterion_eigenvector_preservation},
      {9, "sclime signed-support recovery rate >= 0.9", criterion_sclime_recovery},
      {10, "sslda test risk within 0.02 of the exact benchmark",
       criterion_sslda_risk},
      {11, "eigenratio factor number >= 95% for both sources",
       criterion_eigenratio},
      {12, "planted sparse recovery for sspca and sscca",
       criterion_sparse_recovery},
      {13, "byte-identical simulate output across thread counts",
       criterion_determinism},
  };

  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));

  bool all_ok = true;
  for (const Criterion& c : criteria) {
    if (!selected.empty() &&
        std::find(selected.begin(), selected.end(), c.id) == selected.end())
      continue;
    CheckContext ctx;
    const auto start = std::chrono::steady_clock::now();
    bool ok = false;
    try {
      ok = c.run(ctx);
    } catch (const std::exception& e) {
      ctx.details << "    exception: " << e.what() << "\n";
      ok = false;
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << ": "
              << c.label << "  [" << static_cast<int>(seconds) << "s]\n"
              << ctx.details.str();
    all_ok = all_ok && ok;
  }
  return all_ok ? 0 : 1;
}
