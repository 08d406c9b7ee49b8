#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "mppgeo/frame_bundle.hpp"

namespace mppgeo {

struct LmOptions {
  int max_iterations = 100;
  /// Forward-difference step, relative: h_j = fd_step · max(1, |x_j|).
  double fd_step = 1e-6;
  double initial_damping = 1e-3;
  /// Residual norm regarded as converged.
  double tolerance = 1e-8;
  /// Iterations continue past `tolerance` down to this norm.
  double polish_tolerance = 1e-13;
};

struct LmResult {
  Vec x;
  Vec residual;
  double norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Gauss-Newton on r(x) = 0 with (JᵀJ + μI)δ = −Jᵀr; μ /= 3 on an
/// accepted step, μ *= 4 on a rejected one. Evaluations that throw mppgeo
/// errors count as rejected trial steps.
LmResult levenberg_marquardt(const std::function<Vec(const Vec&)>& residual, const Vec& x0, const LmOptions& opts);

struct ShootingOptions {
  IntegratorConfig integrator{Scheme::kRk4, 100, 1.0};
  LmOptions lm;
  /// Total number of starts; start 0 is the unperturbed initialization.
  int restarts = 8;
  std::uint64_t seed = 0;
  /// Restart perturbation scale relative to ‖ξ_init‖.
  double perturbation = 0.25;
  /// Relative energy difference treated as a tie.
  double tie_tolerance = 1e-9;
};

/// Find initial momentum ξ_0 = [ξ_x | ξ_u] whose MPP from `start` ends at `target`.
struct ShootingProblem {
  FramePoint start;
  Vec target;
};

struct RestartRecord {
  Vec xi0;
  double residual = 0.0;
  double energy = 0.0;
  bool converged = false;
  int iterations = 0;
};

struct ShootingResult {
  Vec xi0;
  Trajectory trajectory;
  double energy = 0.0;
  double residual = 0.0;
  bool converged = false;
  int selected_restart = -1;
  std::vector<RestartRecord> restarts;
};

/// Initial velocity v at x with exp_x(v) = y, by shooting the geodesic ODE
/// from v = y − x. Returns the best velocity found.
Vec riemannian_log(const ChartManifold& M, const Vec& x, const Vec& y, const ShootingOptions& opts = {});

/// Multi-start shooting for a minimizing normal MPP. Among restarts with
/// residual ≤ lm.tolerance the least-energy one wins, ties going to the
/// smallest ‖ξ_0‖. Without any converged restart the best residual is
/// returned with converged = false.
ShootingResult shoot_mpp(const ChartManifold& M, const ShootingProblem& problem, const ShootingOptions& opts = {});

/// ξ_0 with ξ_u = 0 whose MPP starts with velocity v.
Vec momentum_for_velocity(const ChartManifold& M, const FramePoint& s, const Vec& v);

}  // namespace mppgeo
