#pragma once

// Chart-based Riemannian geometry. Every manifold is a single chart; the
// primary object is either the metric g_ij or the cometric g^ij, and all
// connection data is delivered through GeometryJet.

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "mppgeo/errors.hpp"
#include "mppgeo/integrators.hpp"
#include "mppgeo/jet.hpp"
#include "mppgeo/tensor.hpp"
#include "mppgeo/types.hpp"

namespace mppgeo {

enum class MetricSource { kMetric, kCometric };

/// Metric, cometric and connection at one chart point.
struct GeometryJet {
  Vec x;
  Mat g;
  Mat g_inv;
  /// gamma(k, i, j) = Γ^k_ij
  Tensor3 gamma;
  /// gamma_deriv(k, i, j, l) = ∂_l Γ^k_ij
  Tensor4 gamma_deriv;
  /// cometric_deriv(i, j, l) = ∂_l g^ij
  Tensor3 cometric_deriv;

  int dim() const { return static_cast<int>(x.size()); }
};

class ChartManifold {
 public:
  virtual ~ChartManifold() = default;

  virtual int dim() const = 0;
  virtual std::string name() const = 0;
  virtual MetricSource metric_source() const = 0;
  virtual bool in_domain(const Vec& x) const = 0;
  virtual GeometryJet geometry_jet(const Vec& x) const = 0;

  virtual Mat metric(const Vec& x) const { return geometry_jet(x).g; }
  virtual Mat cometric(const Vec& x) const { return geometry_jet(x).g_inv; }

  /// Ambient dimension of the visualization embedding, 0 if there is none.
  virtual int ambient_dim() const { return 0; }
  virtual Vec embed(const Vec& x) const;

  /// Throws ChartDomainError unless x has the right size and lies in the chart.
  void check_domain(const Vec& x) const;
};

using ManifoldPtr = std::shared_ptr<const ChartManifold>;

/// Christoffel symbols and their derivatives from g, ∂g and ∂∂g, where
/// dg(a, b, m) = ∂_m g_ab and ddg(a, b, m, n) = ∂_m ∂_n g_ab.
GeometryJet christoffel_from_metric(const Vec& x, const Mat& g, const Tensor3& dg, const Tensor4& ddg);

/// Metric-primary chart with N coordinates. Subclasses return g_ij as
/// second-order jets in the chart coordinates.
template <int N>
class MetricChart : public ChartManifold {
 public:
  using MetricJet = std::array<std::array<Jet<N>, N>, N>;

  int dim() const override { return N; }
  MetricSource metric_source() const override { return MetricSource::kMetric; }

  GeometryJet geometry_jet(const Vec& x) const override {
    check_domain(x);
    const MetricJet m = metric_jet(x);
    Mat g(N, N);
    Tensor3 dg(N);
    Tensor4 ddg(N);
    for (int a = 0; a < N; ++a) {
      for (int b = 0; b < N; ++b) {
        g(a, b) = m[a][b].v;
        for (int p = 0; p < N; ++p) {
          dg(a, b, p) = m[a][b].d[p];
          for (int q = 0; q < N; ++q) ddg(a, b, p, q) = m[a][b].hess(p, q);
        }
      }
    }
    return christoffel_from_metric(x, g, dg, ddg);
  }

  Mat metric(const Vec& x) const override {
    check_domain(x);
    const MetricJet m = metric_jet(x);
    Mat g(N, N);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) g(a, b) = m[a][b].v;
    return g;
  }

 protected:
  virtual MetricJet metric_jet(const Vec& x) const = 0;
};

/// Surface given by a chart map F: R^2 -> R^3 with induced metric DF^T DF.
/// Derived supplies `template <class T> std::array<T, 3> map(const std::array<T, 2>&) const`.
template <class Derived>
class EmbeddedSurface : public MetricChart<2> {
 public:
  int ambient_dim() const override { return 3; }

  Vec embed(const Vec& x) const override {
    check_domain(x);
    const std::array<double, 3> p = derived().map(std::array<double, 2>{x[0], x[1]});
    return Eigen::Vector3d(p[0], p[1], p[2]);
  }

 protected:
  MetricJet metric_jet(const Vec& x) const override {
    using J = Jet<2>;
    using D = Dual<J>;
    std::array<std::array<J, 3>, 2> dF;
    for (int i = 0; i < 2; ++i) {
      std::array<D, 2> q;
      for (int a = 0; a < 2; ++a) q[a] = D(J::variable(x[a], a), J(a == i ? 1.0 : 0.0));
      const std::array<D, 3> F = derived().map(q);
      for (int c = 0; c < 3; ++c) dF[i][c] = F[c].e;
    }
    MetricJet g;
    for (int i = 0; i < 2; ++i) {
      for (int j = i; j < 2; ++j) {
        J s = dF[i][0] * dF[j][0] + dF[i][1] * dF[j][1] + dF[i][2] * dF[j][2];
        g[i][j] = s;
        g[j][i] = s;
      }
    }
    return g;
  }

 private:
  const Derived& derived() const { return static_cast<const Derived&>(*this); }
};

/// R^d with the identity metric.
class EuclideanSpace : public ChartManifold {
 public:
  explicit EuclideanSpace(int d);

  int dim() const override { return d_; }
  std::string name() const override { return "euclidean"; }
  MetricSource metric_source() const override { return MetricSource::kMetric; }
  bool in_domain(const Vec& x) const override;
  GeometryJet geometry_jet(const Vec& x) const override;
  Mat metric(const Vec& x) const override;
  Mat cometric(const Vec& x) const override;
  /// R^2 embeds as the plane z = 0; other dimensions have no embedding.
  int ambient_dim() const override { return d_ == 2 ? 3 : 0; }
  Vec embed(const Vec& x) const override;

 private:
  int d_;
};

/// Coordinate curvature R_ijk^s = Γ^l_ik Γ^s_jl − Γ^l_jk Γ^s_il + ∂_j Γ^s_ik − ∂_i Γ^s_jk,
/// returned as R(i, j, k, s). With this convention R_ijk^s X^i Y^j Z^k is the
/// s-component of the usual R(Y, X)Z = ∇_Y∇_X Z − ∇_X∇_Y Z − ∇_[Y,X] Z.
Tensor4 curvature(const GeometryJet& jet);
Tensor4 curvature(const ChartManifold& M, const Vec& x);

/// g(R(e1, e2)e2, e1) / (|e1|²|e2|² − g(e1, e2)²); +1 on the unit sphere.
double sectional_curvature(const ChartManifold& M, const Vec& x, const Vec& e1, const Vec& e2);

/// Geodesic ODE ẍ^k = −Γ^k_ij ẋ^i ẋ^j as a first-order field on z = [x | ẋ].
VectorField geodesic_field(const ChartManifold& M);

/// Geodesic from (x0, v0) over [0, cfg.t_end]; states are [x | ẋ].
Trajectory riemannian_geodesic(const ChartManifold& M, const Vec& x0, const Vec& v0, const IntegratorConfig& cfg);

/// Chart path given by samples. Repeated times mark velocity kinks; when v is
/// empty the velocities are estimated by local polynomial differentiation.
struct SampledPath {
  std::vector<double> t;
  std::vector<Vec> x;
  std::vector<Vec> v;

  std::size_t size() const { return t.size(); }
  /// Fills v when it is empty.
  void ensure_velocities();
  void validate(int d) const;
};

/// Parallel transport of the columns of u0 along the path. Each sample
/// interval is integrated with `substeps` RK4 steps on the cubic Hermite
/// interpolant of the samples. Returns the frame at every sample.
std::vector<Mat> parallel_transport(const ChartManifold& M, SampledPath path, const Mat& u0, int substeps = 4);

/// ½ log det of the Gram matrix [g(u_α, u_β)], i.e. log det_g u.
double log_det_frame(const ChartManifold& M, const Vec& x, const Mat& u);

namespace detail {

/// Time derivatives at the samples by local five-point polynomial
/// differentiation; repeated times split the samples into independent pieces.
std::vector<Vec> estimate_derivatives(const std::vector<double>& t, const std::vector<Vec>& x);

/// Cubic Hermite interpolation on [t0, t1].
void hermite(double t0, double t1, const Vec& x0, const Vec& x1, const Vec& v0, const Vec& v1, double t, Vec& x,
             Vec& v);

}  // namespace detail

}  // namespace mppgeo
