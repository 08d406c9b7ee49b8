#include "mppgeo/surfaces.hpp"

#include <cmath>

namespace mppgeo {

Ellipsoid::Ellipsoid(double a, double b, double c) : axes_{a, b, c} {
  for (double s : axes_)
    if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("ellipsoid semi-axes must be positive and finite");
}

std::string Ellipsoid::name() const { return "ellipsoid"; }

bool Ellipsoid::in_domain(const Vec& x) const {
  return x.size() == 2 && x.allFinite() && x.squaredNorm() <= kChartRadius * kChartRadius;
}

Sphere::Sphere(double radius) : Ellipsoid(radius, radius, radius) {}

std::string Sphere::name() const { return "sphere"; }

bool Saddle::in_domain(const Vec& x) const {
  return x.size() == 2 && x.allFinite() && x.squaredNorm() <= kChartRadius * kChartRadius;
}

SurfaceKind parse_surface_kind(const std::string& name) {
  if (name == "plane") return SurfaceKind::kPlane;
  if (name == "sphere") return SurfaceKind::kSphere;
  if (name == "ellipsoid") return SurfaceKind::kEllipsoid;
  if (name == "hyperbolic") return SurfaceKind::kHyperbolic;
  throw InvalidArgument("unknown surface kind '" + name + "'");
}

std::string to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::kPlane:
      return "plane";
    case SurfaceKind::kSphere:
      return "sphere";
    case SurfaceKind::kEllipsoid:
      return "ellipsoid";
    case SurfaceKind::kHyperbolic:
      return "hyperbolic";
  }
  return "unknown";
}

void SurfaceSpec::validate() const {
  if (kind == SurfaceKind::kSphere && (!(radius > 0.0) || !std::isfinite(radius)))
    throw InvalidArgument("sphere radius must be positive and finite");
  if (kind == SurfaceKind::kEllipsoid)
    for (double s : axes)
      if (!(s > 0.0) || !std::isfinite(s)) throw InvalidArgument("ellipsoid semi-axes must be positive and finite");
}

ManifoldPtr make_surface(const SurfaceSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case SurfaceKind::kPlane:
      return std::make_shared<EuclideanSpace>(2);
    case SurfaceKind::kSphere:
      return std::make_shared<Sphere>(spec.radius);
    case SurfaceKind::kEllipsoid:
      return std::make_shared<Ellipsoid>(spec.axes[0], spec.axes[1], spec.axes[2]);
    case SurfaceKind::kHyperbolic:
      return std::make_shared<Saddle>();
  }
  throw InvalidArgument("unknown surface kind");
}

std::vector<Vec> embed(const ChartManifold& M, const std::vector<Vec>& chart_path) {
  std::vector<Vec> out;
  out.reserve(chart_path.size());
  for (const Vec& x : chart_path) out.push_back(M.embed(x));
  return out;
}

}  // namespace mppgeo
