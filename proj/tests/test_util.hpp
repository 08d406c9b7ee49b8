#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "mppgeo/frame_bundle.hpp"
#include "mppgeo/geometry.hpp"
#include "mppgeo/landmarks.hpp"
#include "mppgeo/surfaces.hpp"

namespace testutil {

using mppgeo::Mat;
using mppgeo::Vec;

/// Round sphere in polar coordinates (θ, φ) with g = diag(1, sin²θ).
class PolarSphere : public mppgeo::MetricChart<2> {
 public:
  std::string name() const override { return "polar-sphere"; }
  bool in_domain(const Vec& x) const override { return x[0] > 1e-6 && x[0] < M_PI - 1e-6; }

 protected:
  MetricJet metric_jet(const Vec& x) const override {
    using J = mppgeo::Jet<2>;
    const J th = J::variable(x[0], 0);
    const J s = sin(th);
    MetricJet g;
    g[0][0] = J(1.0);
    g[0][1] = J(0.0);
    g[1][0] = J(0.0);
    g[1][1] = s * s;
    return g;
  }
};

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double a : v) out[i++] = a;
  return out;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec random_vec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> N(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = N(rng);
  return v;
}

/// Random point well inside the useful part of the chart.
inline Vec random_point(const mppgeo::ChartManifold& M, std::mt19937_64& rng) {
  if (auto L = dynamic_cast<const mppgeo::LandmarkManifold*>(&M)) {
    Vec p(L->dim());
    for (int i = 0; i < L->landmarks(); ++i)
      for (int a = 0; a < L->amb(); ++a)
        p[i * L->amb() + a] = (a == 0 ? 1.0 * i : 0.0) + uniform(rng, -0.15, 0.15);
    return p;
  }
  const double r = M.name() == "hyperbolic" ? 0.4 : 0.8;
  Vec x(M.dim());
  for (int i = 0; i < M.dim(); ++i) x[i] = uniform(rng, -r, r);
  return x;
}

/// Well-conditioned anisotropic frame in chart units, d×k.
inline Mat random_frame(std::mt19937_64& rng, int d, int k, double scale = 1.0) {
  Mat u = Mat::Zero(d, k);
  for (int a = 0; a < k; ++a) u(a, a) = scale * uniform(rng, 0.5, 1.2);
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < k; ++a) u(i, a) += scale * uniform(rng, -0.2, 0.2);
  return u;
}

/// Frame orthonormal in g at x.
inline Mat orthonormal_frame(const mppgeo::ChartManifold& M, const Vec& x) {
  const Mat g = M.metric(x);
  Eigen::SelfAdjointEigenSolver<Mat> es(g);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

inline mppgeo::CotangentState random_state(const mppgeo::ChartManifold& M, std::mt19937_64& rng, int k, double lambda,
                                           double frame_scale = 1.0, double momentum_scale = 0.5) {
  mppgeo::CotangentState z;
  z.point.x = random_point(M, rng);
  const Mat e = orthonormal_frame(M, z.point.x);
  z.point.u = e * random_frame(rng, M.dim(), k, frame_scale);
  z.point.lambda = lambda;
  z.xi_x = random_vec(rng, M.dim(), momentum_scale);
  z.xi_u = Eigen::Map<Mat>(random_vec(rng, M.dim() * k, momentum_scale).data(), M.dim(), k);
  return z;
}

/// Standard Christoffel symbols from central differences of the metric.
inline mppgeo::Tensor3 fd_christoffel(const mppgeo::ChartManifold& M, const Vec& x, double h = 1e-5) {
  const int d = M.dim();
  std::vector<Mat> dg(d);
  for (int m = 0; m < d; ++m) {
    Vec e = Vec::Zero(d);
    e[m] = h;
    dg[m] = (M.metric(x + e) - M.metric(x - e)) / (2 * h);
  }
  const Mat gi = M.metric(x).inverse();
  mppgeo::Tensor3 G(d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += 0.5 * gi(k, l) * (dg[i](l, j) + dg[j](l, i) - dg[l](i, j));
        G(k, i, j) = s;
      }
  return G;
}

inline double max_diff(const mppgeo::Tensor3& a, const mppgeo::Tensor3& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

inline double max_diff(const mppgeo::Tensor4& a, const mppgeo::Tensor4& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

/// sup_t of the chart distance between two equally sampled point lists.
inline double sup_distance(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) m = std::max(m, (a[i] - b[i]).norm());
  return m;
}

inline std::vector<Vec> base_points(const mppgeo::Trajectory& tr, int d) {
  std::vector<Vec> out;
  for (const Vec& z : tr.z) out.push_back(z.head(d));
  return out;
}

inline std::vector<mppgeo::ManifoldPtr> bundled_surfaces() {
  using mppgeo::SurfaceKind;
  using mppgeo::SurfaceSpec;
  return {mppgeo::make_surface({SurfaceKind::kPlane}), mppgeo::make_surface({SurfaceKind::kSphere, 1.0}),
          mppgeo::make_surface({SurfaceKind::kEllipsoid, 1.0, {1.0, 0.8, 0.6}}),
          mppgeo::make_surface({SurfaceKind::kHyperbolic})};
}

}  // namespace testutil
