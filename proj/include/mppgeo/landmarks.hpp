#pragma once

// LDDMM landmark manifold with the Gaussian kernel cometric
//   g^{(i,a)(j,b)}(p) = K(p_i, p_j) δ_ab,  K(p, q) = exp(−|p − q|² / 2σ²).
// Coordinates are landmark-major: index i * amb + a is component a of
// landmark i.

#include <string>
#include <vector>

#include "mppgeo/geometry.hpp"

namespace mppgeo {

class LandmarkManifold : public ChartManifold {
 public:
  static constexpr double kCoincidence = 1e-12;

  LandmarkManifold(int n_landmarks, int amb, double sigma);

  int dim() const override { return n_ * amb_; }
  std::string name() const override { return "landmarks"; }
  MetricSource metric_source() const override { return MetricSource::kCometric; }
  /// Valid when no two landmarks coincide (within kCoincidence).
  bool in_domain(const Vec& x) const override;
  GeometryJet geometry_jet(const Vec& x) const override;
  Mat metric(const Vec& x) const override;
  Mat cometric(const Vec& x) const override;

  int landmarks() const { return n_; }
  int amb() const { return amb_; }
  double sigma() const { return sigma_; }

  double kernel(const Vec& p, const Vec& q) const;
  /// Throws SingularMetricError naming the first coincident pair.
  void check_distinct(const Vec& x) const;

 private:
  int n_;
  int amb_;
  double sigma_;
};

/// g^ij as a d×d matrix.
Mat landmark_cometric(const LandmarkManifold& L, const Vec& p);
/// out(i, j, r) = ∂_r g^ij.
Tensor3 landmark_cometric_deriv(const LandmarkManifold& L, const Vec& p);
/// out(i, j, r, s) = ∂_r ∂_s g^ij.
Tensor4 landmark_cometric_second_deriv(const LandmarkManifold& L, const Vec& p);

/// Christoffel symbols and their derivatives computed from the cometric and
/// its first two derivatives, without differentiating the metric.
GeometryJet landmark_christoffel(const LandmarkManifold& L, const Vec& p);

/// Independent route: the cometric is evaluated in second-order jets, inverted
/// in jet arithmetic, and fed to the standard metric formula. Supports d ≤ 8.
GeometryJet metric_route_christoffel(const LandmarkManifold& L, const Vec& p);

/// Kernel interpolation of landmark velocities: v(y) = Σ_i K(y, p_i) α_i with
/// α chosen so that v(p_i) = pdot_i.
Vec landmark_interpolated_velocity(const LandmarkManifold& L, const Vec& p, const Vec& pdot, const Vec& y);

}  // namespace mppgeo
