#pragma once

#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "mppgeo/types.hpp"

namespace mppgeo {

enum class Scheme { kEuler, kRk4 };

std::string to_string(Scheme scheme);
Scheme parse_scheme(std::string_view name);

/// Fixed-step explicit integration on [0, t_end].
struct IntegratorConfig {
  Scheme scheme = Scheme::kRk4;
  int steps = 1000;
  double t_end = 1.0;

  void validate() const;
  double step_size() const { return t_end / steps; }
};

enum class IntegrationStatus { kOk, kChartExit, kFailure };

std::string to_string(IntegrationStatus status);

/// Dense output of a fixed-step integration: steps + 1 uniform samples when
/// the run completes, fewer when it stopped early.
struct Trajectory {
  std::vector<double> t;
  std::vector<Vec> z;
  /// Hamiltonian per sample; empty unless the integrated field has one.
  std::vector<double> hamiltonian;
  IntegrationStatus status = IntegrationStatus::kOk;
  std::string message;
  /// Time of the last accepted sample when status != kOk.
  double exit_time = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::string> diagnostics;
  std::string chart;

  bool ok() const { return status == IntegrationStatus::kOk; }
  std::size_t size() const { return z.size(); }
  const Vec& back() const { return z.back(); }
};

using VectorField = std::function<Vec(double, const Vec&)>;

/// Integrates z' = f(t, z). Chart exits and other geometry errors thrown by
/// the field stop the run and return the partial trajectory.
Trajectory integrate(const VectorField& field, const Vec& z0, const IntegratorConfig& cfg);

/// One explicit step of the given scheme.
Vec step(const VectorField& field, double t, const Vec& z, double h, Scheme scheme);

}  // namespace mppgeo
