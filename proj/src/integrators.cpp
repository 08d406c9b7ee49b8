#include "mppgeo/integrators.hpp"

#include <cmath>

#include "mppgeo/errors.hpp"

namespace mppgeo {

std::string to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::kEuler:
      return "euler";
    case Scheme::kRk4:
      return "rk4";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view name) {
  if (name == "euler") return Scheme::kEuler;
  if (name == "rk4") return Scheme::kRk4;
  throw InvalidArgument("unknown integration scheme '" + std::string(name) + "' (expected euler or rk4)");
}

std::string to_string(IntegrationStatus status) {
  switch (status) {
    case IntegrationStatus::kOk:
      return "ok";
    case IntegrationStatus::kChartExit:
      return "chart_exit";
    case IntegrationStatus::kFailure:
      return "failure";
  }
  return "unknown";
}

void IntegratorConfig::validate() const {
  if (steps < 1) throw InvalidArgument("integrator steps must be >= 1");
  if (!(t_end > 0.0) || !std::isfinite(t_end)) throw InvalidArgument("integrator t_end must be positive and finite");
}

Vec step(const VectorField& field, double t, const Vec& z, double h, Scheme scheme) {
  if (scheme == Scheme::kEuler) return z + h * field(t, z);
  const Vec k1 = field(t, z);
  const Vec k2 = field(t + 0.5 * h, z + 0.5 * h * k1);
  const Vec k3 = field(t + 0.5 * h, z + 0.5 * h * k2);
  const Vec k4 = field(t + h, z + h * k3);
  return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Trajectory integrate(const VectorField& field, const Vec& z0, const IntegratorConfig& cfg) {
  cfg.validate();
  Trajectory out;
  out.t.reserve(cfg.steps + 1);
  out.z.reserve(cfg.steps + 1);
  out.t.push_back(0.0);
  out.z.push_back(z0);
  const double h = cfg.step_size();
  Vec z = z0;
  for (int n = 0; n < cfg.steps; ++n) {
    const double t = n * h;
    try {
      z = step(field, t, z, h, cfg.scheme);
    } catch (const ChartDomainError& e) {
      out.status = IntegrationStatus::kChartExit;
      out.message = e.what();
      out.exit_time = t;
      return out;
    } catch (const Error& e) {
      out.status = IntegrationStatus::kFailure;
      out.message = e.what();
      out.exit_time = t;
      return out;
    }
    if (!z.allFinite()) {
      out.status = IntegrationStatus::kFailure;
      out.message = "non-finite state";
      out.exit_time = t;
      return out;
    }
    out.t.push_back((n + 1 == cfg.steps) ? cfg.t_end : (n + 1) * h);
    out.z.push_back(z);
  }
  return out;
}

}  // namespace mppgeo
