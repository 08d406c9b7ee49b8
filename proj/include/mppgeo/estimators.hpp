#pragma once

#include <functional>
#include <vector>

#include "mppgeo/shooting.hpp"

namespace mppgeo {

struct EstimatorOptions {
  /// Inner shooting per data point; a single start keeps evaluations cheap.
  ShootingOptions shooting = [] {
    ShootingOptions s;
    s.restarts = 1;
    return s;
  }();
  /// Nelder–Mead stops once the simplex size falls below this; objective
  /// round-off keeps much smaller sizes out of reach.
  double simplex_tolerance = 1e-7;
  int max_iterations = 5000;
  /// Initial simplex edge, relative to the data spread (floored at 1e-3).
  double initial_step = 0.2;
  /// Smallest admissible singular value of u before the fit is abandoned.
  double rank_guard = 1e-6;
  /// Shoot data points concurrently.
  bool parallel = true;
};

struct ObjectiveLogEntry {
  int iteration = 0;
  double objective = 0.0;
  double simplex_size = 0.0;
};

struct FrechetResult {
  Vec x;
  double objective = 0.0;
  std::vector<double> distances;
  std::vector<ObjectiveLogEntry> log;
  bool converged = false;
};

struct MleResult {
  Vec x;
  /// Canonical frame VΛ^{1/2}: columns by decreasing length, largest entry positive.
  Mat u;
  double lambda = 0.0;
  double objective = 0.0;
  std::vector<double> distances;
  std::vector<ObjectiveLogEntry> log;
  bool converged = false;
};

using Section = std::function<FramePoint(const Vec&)>;

/// Squared sub-Riemannian distances from s to each fiber over data[i].
/// Throws ShootingFailure(i) when point i cannot be reached.
std::vector<double> squared_distances(const ChartManifold& M, const FramePoint& s, const std::vector<Vec>& data,
                                      const EstimatorOptions& opts);

/// argmin_x Σ_i d(s(x), π⁻¹(y_i))² over chart coordinates.
FrechetResult frechet_mean_fm(const ChartManifold& M, const std::vector<Vec>& data, const Section& section,
                              const EstimatorOptions& opts = {});

/// argmin over (x, u) ∈ F^kM of Σ_i d(u, π⁻¹(y_i))² + N log det_g u.
/// In a flat chart with k = d this gives ûûᵀ = 2Σ̂ with Σ̂ the sample MLE
/// covariance. Throws CovarianceCollapse when σ_min(u) drops below the guard.
MleResult mle_mean_covariance(const ChartManifold& M, const std::vector<Vec>& data, int k, double lambda = 0.0,
                              const EstimatorOptions& opts = {});

/// VΛ^{1/2} from the top-k eigenpairs of uuᵀ, with a fixed sign convention.
Mat canonical_frame(const Mat& u);

}  // namespace mppgeo
