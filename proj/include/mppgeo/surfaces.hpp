#pragma once

#include <array>
#include <string>
#include <vector>

#include "mppgeo/geometry.hpp"

namespace mppgeo {

/// Ellipsoid (x/a)² + (y/b)² + (z/c)² = 1 in the stereographic chart from the
/// south pole: q ↦ (2a q1, 2b q2, c(1 − |q|²)) / (1 + |q|²). The chart origin
/// maps to (0, 0, c).
class Ellipsoid : public EmbeddedSurface<Ellipsoid> {
 public:
  static constexpr double kChartRadius = 100.0;

  Ellipsoid(double a, double b, double c);

  std::string name() const override;
  bool in_domain(const Vec& x) const override;

  const std::array<double, 3>& axes() const { return axes_; }

  template <class T>
  std::array<T, 3> map(const std::array<T, 2>& q) const {
    const T r2 = q[0] * q[0] + q[1] * q[1];
    const T inv = 1.0 / (1.0 + r2);
    return {axes_[0] * 2.0 * q[0] * inv, axes_[1] * 2.0 * q[1] * inv, axes_[2] * (1.0 - r2) * inv};
  }

 private:
  std::array<double, 3> axes_;
};

class Sphere : public Ellipsoid {
 public:
  explicit Sphere(double radius);
  std::string name() const override;
  double radius() const { return axes()[0]; }
};

/// Saddle z = x² − y² in the graph chart; Gauss curvature −4 at the origin.
class Saddle : public EmbeddedSurface<Saddle> {
 public:
  static constexpr double kChartRadius = 1e3;

  std::string name() const override { return "hyperbolic"; }
  bool in_domain(const Vec& x) const override;

  template <class T>
  std::array<T, 3> map(const std::array<T, 2>& q) const {
    return {q[0], q[1], q[0] * q[0] - q[1] * q[1]};
  }
};

enum class SurfaceKind { kPlane, kSphere, kEllipsoid, kHyperbolic };

SurfaceKind parse_surface_kind(const std::string& name);
std::string to_string(SurfaceKind kind);

struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::kPlane;
  double radius = 1.0;
  std::array<double, 3> axes{1.0, 0.8, 0.6};

  void validate() const;
};

ManifoldPtr make_surface(const SurfaceSpec& spec);

/// Applies the chart map pointwise.
std::vector<Vec> embed(const ChartManifold& M, const std::vector<Vec>& chart_path);

}  // namespace mppgeo
