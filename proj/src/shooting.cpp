#include "mppgeo/shooting.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace mppgeo {

namespace {

bool try_eval(const std::function<Vec(const Vec&)>& f, const Vec& x, Vec& out) {
  try {
    out = f(x);
  } catch (const Error&) {
    return false;
  }
  return out.allFinite();
}

}  // namespace

LmResult levenberg_marquardt(const std::function<Vec(const Vec&)>& residual, const Vec& x0, const LmOptions& opts) {
  LmResult res;
  res.x = x0;
  if (!try_eval(residual, x0, res.residual)) {
    res.norm = std::numeric_limits<double>::infinity();
    return res;
  }
  res.norm = res.residual.norm();
  const int n = static_cast<int>(x0.size());
  double mu = opts.initial_damping;
  Vec trial_r;
  while (res.iterations < opts.max_iterations && res.norm > opts.polish_tolerance) {
    ++res.iterations;
    const int m = static_cast<int>(res.residual.size());
    Mat J(m, n);
    bool ok = true;
    for (int j = 0; j < n && ok; ++j) {
      const double h = opts.fd_step * std::max(1.0, std::abs(res.x[j]));
      Vec xp = res.x;
      xp[j] += h;
      Vec rp;
      if (try_eval(residual, xp, rp)) {
        J.col(j) = (rp - res.residual) / h;
      } else {
        xp[j] = res.x[j] - h;
        if (!try_eval(residual, xp, rp)) ok = false;
        else J.col(j) = (res.residual - rp) / h;
      }
    }
    if (!ok) break;
    const Mat JtJ = J.transpose() * J;
    const Vec g = J.transpose() * res.residual;
    bool accepted = false;
    while (!accepted && mu < 1e16) {
      const Mat A = JtJ + mu * Mat::Identity(n, n);
      const Vec delta = A.ldlt().solve(-g);
      if (delta.norm() <= 1e-16 * (1.0 + res.x.norm())) {
        mu = 1e17;
        break;
      }
      const Vec xt = res.x + delta;
      if (try_eval(residual, xt, trial_r) && trial_r.norm() < res.norm) {
        res.x = xt;
        res.residual = trial_r;
        res.norm = trial_r.norm();
        mu = std::max(mu / 3.0, 1e-15);
        accepted = true;
      } else {
        mu *= 4.0;
      }
    }
    if (!accepted) break;
  }
  res.converged = res.norm <= opts.tolerance;
  return res;
}

Vec riemannian_log(const ChartManifold& M, const Vec& x, const Vec& y, const ShootingOptions& opts) {
  M.check_domain(x);
  M.check_domain(y);
  const int d = M.dim();
  auto f = [&](const Vec& v) -> Vec {
    const Trajectory tr = riemannian_geodesic(M, x, v, opts.integrator);
    if (!tr.ok()) throw ChartDomainError(tr.message);
    return tr.back().head(d) - y;
  };
  return levenberg_marquardt(f, y - x, opts.lm).x;
}

Vec momentum_for_velocity(const ChartManifold& M, const FramePoint& s, const Vec& v) {
  Mat W = s.u * s.u.transpose();
  if (s.lambda != 0.0) W += s.lambda * M.cometric(s.x);
  const int d = s.d();
  Vec xi = Vec::Zero(d + d * s.k());
  xi.head(d) = W.ldlt().solve(v);
  return xi;
}

namespace {

CotangentState state_from_momentum(const FramePoint& s, const Vec& xi) {
  const int d = s.d(), k = s.k();
  CotangentState z;
  z.point = s;
  z.xi_x = xi.head(d);
  z.xi_u = Eigen::Map<const Mat>(xi.data() + d, d, k);
  return z;
}

}  // namespace

ShootingResult shoot_mpp(const ChartManifold& M, const ShootingProblem& problem, const ShootingOptions& opts) {
  const FramePoint& s = problem.start;
  s.validate();
  M.check_domain(s.x);
  M.check_domain(problem.target);
  if (opts.restarts < 1) throw InvalidArgument("shooting needs at least one start");
  const int d = M.dim(), k = s.k();

  auto endpoint = [&](const Vec& xi) -> Vec {
    const Trajectory tr = integrate_mpp(M, state_from_momentum(s, xi), opts.integrator);
    if (!tr.ok()) throw ChartDomainError(tr.message);
    return tr.back().head(d) - problem.target;
  };

  const Vec xi_init = momentum_for_velocity(M, s, riemannian_log(M, s.x, problem.target, opts));
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double scale = opts.perturbation * (xi_init.norm() + 1e-3);

  ShootingResult out;
  int best_residual = -1;
  for (int r = 0; r < opts.restarts; ++r) {
    Vec start = xi_init;
    if (r > 0)
      for (int i = 0; i < start.size(); ++i) start[i] += scale * normal(rng);
    const LmResult lm = levenberg_marquardt(endpoint, start, opts.lm);
    RestartRecord rec;
    rec.xi0 = lm.x;
    rec.residual = lm.norm;
    rec.converged = lm.converged;
    rec.iterations = lm.iterations;
    rec.energy = std::numeric_limits<double>::quiet_NaN();
    if (lm.converged) {
      const Trajectory tr = integrate_mpp(M, state_from_momentum(s, lm.x), opts.integrator);
      try {
        rec.energy = sub_riemannian_energy(M, frame_path_from_mpp(M, tr, k, s.lambda), s.lambda);
      } catch (const Error&) {
        rec.converged = false;
      }
    }
    out.restarts.push_back(rec);
    if (best_residual < 0 || rec.residual < out.restarts[best_residual].residual) best_residual = r;
  }

  int chosen = -1;
  for (int r = 0; r < opts.restarts; ++r) {
    const RestartRecord& rec = out.restarts[r];
    if (!rec.converged) continue;
    if (chosen < 0) {
      chosen = r;
      continue;
    }
    const RestartRecord& cur = out.restarts[chosen];
    const double tie = opts.tie_tolerance * std::max(std::abs(cur.energy), std::abs(rec.energy));
    if (rec.energy < cur.energy - tie || (std::abs(rec.energy - cur.energy) <= tie && rec.xi0.norm() < cur.xi0.norm()))
      chosen = r;
  }
  out.converged = chosen >= 0;
  out.selected_restart = out.converged ? chosen : best_residual;
  const RestartRecord& sel = out.restarts[out.selected_restart];
  out.xi0 = sel.xi0;
  out.residual = sel.residual;
  out.trajectory = integrate_mpp(M, state_from_momentum(s, sel.xi0), opts.integrator);
  out.energy = out.converged ? sel.energy : 2.0 * out.trajectory.hamiltonian.front();
  return out;
}

}  // namespace mppgeo
