#include "mppgeo/estimators.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <future>
#include <memory>
#include <numeric>
#include <thread>

namespace mppgeo {

namespace {

double shoot_one(const ChartManifold& M, const FramePoint& s, const Vec& y, const ShootingOptions& opts, int index) {
  try {
    const ShootingResult r = shoot_mpp(M, {s, y}, opts);
    if (!r.converged)
      throw ShootingFailure("shooting to data point " + std::to_string(index) + " did not converge (residual " +
                                std::to_string(r.residual) + ")",
                            index);
    return r.energy;
  } catch (const ShootingFailure&) {
    throw;
  } catch (const Error& e) {
    throw ShootingFailure("shooting to data point " + std::to_string(index) + " failed: " + e.what(), index);
  }
}

// Sequential Nelder–Mead driver over GSL's nmsimplex2. Exceptions thrown by
// the objective stop the search and are rethrown after the current iterate.
struct NelderMead {
  std::function<double(const Vec&)> objective;
  std::exception_ptr pending;

  static double trampoline(const gsl_vector* v, void* params) {
    auto* self = static_cast<NelderMead*>(params);
    if (self->pending) return 1e300;
    Vec x(static_cast<Eigen::Index>(v->size));
    for (std::size_t i = 0; i < v->size; ++i) x[static_cast<Eigen::Index>(i)] = gsl_vector_get(v, i);
    try {
      const double f = self->objective(x);
      return std::isfinite(f) ? f : 1e300;
    } catch (...) {
      self->pending = std::current_exception();
      return 1e300;
    }
  }

  struct Outcome {
    Vec x;
    double value = 0.0;
    bool converged = false;
  };

  Outcome run(const Vec& x0, const Vec& steps, const EstimatorOptions& opts, std::vector<ObjectiveLogEntry>& log) {
    gsl_set_error_handler_off();
    const std::size_t n = static_cast<std::size_t>(x0.size());
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(n), gsl_vector_free);
    std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> ss(gsl_vector_alloc(n), gsl_vector_free);
    for (std::size_t i = 0; i < n; ++i) {
      gsl_vector_set(x.get(), i, x0[static_cast<Eigen::Index>(i)]);
      gsl_vector_set(ss.get(), i, steps[static_cast<Eigen::Index>(i)]);
    }
    std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n), gsl_multimin_fminimizer_free);
    gsl_multimin_function f{&NelderMead::trampoline, n, this};
    gsl_multimin_fminimizer_set(s.get(), &f, x.get(), ss.get());
    if (pending) std::rethrow_exception(pending);

    Outcome out;
    for (int it = 1; it <= opts.max_iterations; ++it) {
      const int status = gsl_multimin_fminimizer_iterate(s.get());
      if (pending) std::rethrow_exception(pending);
      const double size = gsl_multimin_fminimizer_size(s.get());
      log.push_back({it, s->fval, size});
      if (status != GSL_SUCCESS) break;
      if (gsl_multimin_test_size(size, opts.simplex_tolerance) == GSL_SUCCESS) {
        out.converged = true;
        break;
      }
    }
    out.x.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) out.x[static_cast<Eigen::Index>(i)] = gsl_vector_get(s->x, i);
    out.value = s->fval;
    return out;
  }
};

Vec coordinate_mean(const std::vector<Vec>& data) {
  Vec m = Vec::Zero(data.front().size());
  for (const Vec& y : data) m += y;
  return m / static_cast<double>(data.size());
}

Mat coordinate_covariance(const std::vector<Vec>& data, const Vec& mean) {
  Mat S = Mat::Zero(mean.size(), mean.size());
  for (const Vec& y : data) S += (y - mean) * (y - mean).transpose();
  return S / static_cast<double>(data.size());
}

void check_data(const ChartManifold& M, const std::vector<Vec>& data) {
  if (data.empty()) throw InvalidArgument("estimator needs at least one data point");
  for (const Vec& y : data) {
    if (y.size() != M.dim()) throw InvalidArgument("data point dimension does not match the manifold");
    M.check_domain(y);
  }
}

}  // namespace

std::vector<double> squared_distances(const ChartManifold& M, const FramePoint& s, const std::vector<Vec>& data,
                                      const EstimatorOptions& opts) {
  std::vector<double> d2(data.size());
  if (!opts.parallel || data.size() < 2 || std::thread::hardware_concurrency() < 2) {
    for (std::size_t i = 0; i < data.size(); ++i) d2[i] = shoot_one(M, s, data[i], opts.shooting, static_cast<int>(i));
    return d2;
  }
  std::vector<std::future<double>> jobs;
  jobs.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    jobs.push_back(std::async(std::launch::async, shoot_one, std::cref(M), std::cref(s), std::cref(data[i]),
                              std::cref(opts.shooting), static_cast<int>(i)));
  std::exception_ptr first;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    try {
      d2[i] = jobs[i].get();
    } catch (...) {
      if (!first) first = std::current_exception();
    }
  }
  if (first) std::rethrow_exception(first);
  return d2;
}

FrechetResult frechet_mean_fm(const ChartManifold& M, const std::vector<Vec>& data, const Section& section,
                              const EstimatorOptions& opts) {
  check_data(M, data);
  const Vec x0 = coordinate_mean(data);
  const double spread = std::sqrt(coordinate_covariance(data, x0).trace());
  const Vec steps = Vec::Constant(x0.size(), opts.initial_step * std::max(spread, 1e-3));

  NelderMead nm;
  nm.objective = [&](const Vec& x) {
    M.check_domain(x);
    const std::vector<double> d2 = squared_distances(M, section(x), data, opts);
    return std::accumulate(d2.begin(), d2.end(), 0.0);
  };
  FrechetResult out;
  const auto r = nm.run(x0, steps, opts, out.log);
  out.x = r.x;
  out.converged = r.converged;
  const std::vector<double> d2 = squared_distances(M, section(out.x), data, opts);
  out.objective = std::accumulate(d2.begin(), d2.end(), 0.0);
  for (double v : d2) out.distances.push_back(std::sqrt(std::max(v, 0.0)));
  return out;
}

Mat canonical_frame(const Mat& u) {
  const int d = static_cast<int>(u.rows()), k = static_cast<int>(u.cols());
  Eigen::SelfAdjointEigenSolver<Mat> es(u * u.transpose());
  Mat out(d, k);
  for (int a = 0; a < k; ++a) {
    const int idx = d - 1 - a;
    Vec col = es.eigenvectors().col(idx) * std::sqrt(std::max(es.eigenvalues()[idx], 0.0));
    Eigen::Index imax = 0;
    col.cwiseAbs().maxCoeff(&imax);
    if (col[imax] < 0) col = -col;
    out.col(a) = col;
  }
  return out;
}

MleResult mle_mean_covariance(const ChartManifold& M, const std::vector<Vec>& data, int k, double lambda,
                              const EstimatorOptions& opts) {
  check_data(M, data);
  const int d = M.dim();
  if (data.size() < 2) throw InvalidArgument("maximum likelihood fit needs at least two data points");
  if (k < 1 || k > d) throw InvalidArgument("frame rank must satisfy 1 <= k <= d");
  if (lambda < 0.0) throw InvalidArgument("lambda must be nonnegative");
  if (k < d && lambda == 0.0) throw InvalidArgument("a rank-deficient frame needs lambda > 0");
  const double N = static_cast<double>(data.size());

  const Vec mean = coordinate_mean(data);
  const double s = std::sqrt(coordinate_covariance(data, mean).trace() / d);
  Vec p0(d + d * k);
  p0.head(d) = mean;
  p0.tail(d * k) = Eigen::Map<const Vec>(Mat(s * Mat::Identity(d, k)).data(), d * k);
  const double scale = std::max(s, 1e-3);
  const Vec steps = Vec::Constant(p0.size(), opts.initial_step * scale);

  auto unpack = [&](const Vec& p) {
    FramePoint f;
    f.x = p.head(d);
    f.u = Eigen::Map<const Mat>(p.data() + d, d, k);
    f.lambda = lambda;
    return f;
  };
  auto guard = [&](const Mat& u) {
    const double smin = smallest_singular_value(u);
    if (smin < opts.rank_guard)
      throw CovarianceCollapse("frame collapsed: smallest singular value " + std::to_string(smin) +
                               " below the rank guard");
  };
  auto objective = [&](const FramePoint& f, std::vector<double>* d2_out) {
    guard(f.u);
    M.check_domain(f.x);
    std::vector<double> d2 = squared_distances(M, f, data, opts);
    const double value = std::accumulate(d2.begin(), d2.end(), 0.0) + N * log_det_frame(M, f.x, f.u);
    if (d2_out) *d2_out = std::move(d2);
    return value;
  };

  NelderMead nm;
  nm.objective = [&](const Vec& p) { return objective(unpack(p), nullptr); };
  MleResult out;
  const auto r = nm.run(p0, steps, opts, out.log);
  const FramePoint best = unpack(r.x);
  std::vector<double> d2;
  out.objective = objective(best, &d2);
  out.x = best.x;
  out.u = canonical_frame(best.u);
  out.lambda = lambda;
  out.converged = r.converged;
  for (double v : d2) out.distances.push_back(std::sqrt(std::max(v, 0.0)));
  return out;
}

}  // namespace mppgeo
