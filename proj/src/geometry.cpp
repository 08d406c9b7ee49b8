#include "mppgeo/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mppgeo {

Vec ChartManifold::embed(const Vec&) const { throw InvalidArgument(name() + " has no embedding"); }

void ChartManifold::check_domain(const Vec& x) const {
  if (x.size() != dim()) {
    std::ostringstream os;
    os << name() << ": expected a point of dimension " << dim() << ", got " << x.size();
    throw InvalidArgument(os.str());
  }
  if (!x.allFinite() || !in_domain(x)) {
    std::ostringstream os;
    os << name() << ": point (" << x.transpose() << ") outside chart domain";
    throw ChartDomainError(os.str());
  }
}

GeometryJet christoffel_from_metric(const Vec& x, const Mat& g, const Tensor3& dg, const Tensor4& ddg) {
  const int d = static_cast<int>(g.rows());
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success || (g - g.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1.0 + g.cwiseAbs().maxCoeff())) {
    std::ostringstream os;
    os << "metric is not symmetric positive definite at (" << x.transpose() << ")";
    throw NonSpdMetricError(os.str());
  }
  GeometryJet J;
  J.x = x;
  J.g = g;
  J.g_inv = llt.solve(Mat::Identity(d, d));
  J.g_inv = 0.5 * (J.g_inv + J.g_inv.transpose());
  const Mat& gi = J.g_inv;

  // Γ_lij = ½(∂_i g_lj + ∂_j g_li − ∂_l g_ij) and its derivative
  Tensor3 low(d);
  Tensor4 dlow(d);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        low(l, i, j) = 0.5 * (dg(l, j, i) + dg(l, i, j) - dg(i, j, l));
        for (int m = 0; m < d; ++m)
          dlow(l, i, j, m) = 0.5 * (ddg(l, j, i, m) + ddg(l, i, j, m) - ddg(i, j, l, m));
      }

  // ∂_m g^kl = −g^ka ∂_m g_ab g^bl
  J.cometric_deriv = Tensor3(d);
  for (int m = 0; m < d; ++m) {
    Mat dm(d, d);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) dm(a, b) = dg(a, b, m);
    const Mat c = -gi * dm * gi;
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l) J.cometric_deriv(k, l, m) = c(k, l);
  }

  J.gamma = Tensor3(d);
  J.gamma_deriv = Tensor4(d);
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i; j < d; ++j) {
        double s = 0.0;
        for (int l = 0; l < d; ++l) s += gi(k, l) * low(l, i, j);
        J.gamma(k, i, j) = s;
        J.gamma(k, j, i) = s;
        for (int m = 0; m < d; ++m) {
          double t = 0.0;
          for (int l = 0; l < d; ++l) t += J.cometric_deriv(k, l, m) * low(l, i, j) + gi(k, l) * dlow(l, i, j, m);
          J.gamma_deriv(k, i, j, m) = t;
          J.gamma_deriv(k, j, i, m) = t;
        }
      }
  return J;
}

EuclideanSpace::EuclideanSpace(int d) : d_(d) {
  if (d < 1) throw InvalidArgument("euclidean dimension must be >= 1");
}

bool EuclideanSpace::in_domain(const Vec& x) const { return x.size() == d_ && x.allFinite(); }

GeometryJet EuclideanSpace::geometry_jet(const Vec& x) const {
  check_domain(x);
  GeometryJet J;
  J.x = x;
  J.g = Mat::Identity(d_, d_);
  J.g_inv = Mat::Identity(d_, d_);
  J.gamma = Tensor3(d_);
  J.gamma_deriv = Tensor4(d_);
  J.cometric_deriv = Tensor3(d_);
  return J;
}

Mat EuclideanSpace::metric(const Vec& x) const {
  check_domain(x);
  return Mat::Identity(d_, d_);
}

Mat EuclideanSpace::cometric(const Vec& x) const {
  check_domain(x);
  return Mat::Identity(d_, d_);
}

Vec EuclideanSpace::embed(const Vec& x) const {
  if (d_ != 2) return ChartManifold::embed(x);
  check_domain(x);
  return Eigen::Vector3d(x[0], x[1], 0.0);
}

Tensor4 curvature(const GeometryJet& J) {
  const int d = J.dim();
  Tensor4 R(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int s = 0; s < d; ++s) {
          double r = J.gamma_deriv(s, i, k, j) - J.gamma_deriv(s, j, k, i);
          for (int l = 0; l < d; ++l) r += J.gamma(l, i, k) * J.gamma(s, j, l) - J.gamma(l, j, k) * J.gamma(s, i, l);
          R(i, j, k, s) = r;
        }
  return R;
}

Tensor4 curvature(const ChartManifold& M, const Vec& x) { return curvature(M.geometry_jet(x)); }

double sectional_curvature(const ChartManifold& M, const Vec& x, const Vec& e1, const Vec& e2) {
  const GeometryJet J = M.geometry_jet(x);
  const Tensor4 R = curvature(J);
  const int d = J.dim();
  // R_std(e1, e2)e2 = R_ijk^s e2^i e1^j e2^k
  Vec w = Vec::Zero(d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int s = 0; s < d; ++s) w[s] += R(i, j, k, s) * e2[i] * e1[j] * e2[k];
  const double num = e1.dot(J.g * w);
  const double a = e1.dot(J.g * e1);
  const double b = e2.dot(J.g * e2);
  const double c = e1.dot(J.g * e2);
  const double den = a * b - c * c;
  if (!(den > 0.0)) throw InvalidArgument("sectional_curvature: e1 and e2 are linearly dependent");
  return num / den;
}

VectorField geodesic_field(const ChartManifold& M) {
  return [&M](double, const Vec& z) {
    const int d = M.dim();
    const Vec x = z.head(d);
    const Vec v = z.tail(d);
    const GeometryJet J = M.geometry_jet(x);
    Vec dz(2 * d);
    dz.head(d) = v;
    for (int k = 0; k < d; ++k) {
      double a = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a -= J.gamma(k, i, j) * v[i] * v[j];
      dz[d + k] = a;
    }
    return dz;
  };
}

Trajectory riemannian_geodesic(const ChartManifold& M, const Vec& x0, const Vec& v0, const IntegratorConfig& cfg) {
  M.check_domain(x0);
  if (v0.size() != M.dim()) throw InvalidArgument("riemannian_geodesic: velocity dimension mismatch");
  Vec z0(2 * M.dim());
  z0 << x0, v0;
  Trajectory tr = integrate(geodesic_field(M), z0, cfg);
  tr.chart = M.name();
  return tr;
}

namespace {

// derivative at t[n] of the Lagrange interpolant through samples lo..hi
Vec lagrange_derivative(const std::vector<double>& t, const std::vector<Vec>& x, int n, int lo, int hi) {
  Vec out = Vec::Zero(x[n].size());
  for (int j = lo; j <= hi; ++j) {
    double w;
    if (j == n) {
      w = 0.0;
      for (int m = lo; m <= hi; ++m)
        if (m != n) w += 1.0 / (t[n] - t[m]);
    } else {
      double num = 1.0, den = 1.0;
      for (int m = lo; m <= hi; ++m) {
        if (m == j) continue;
        den *= t[j] - t[m];
        if (m != n) num *= t[n] - t[m];
      }
      w = num / den;
    }
    out += w * x[j];
  }
  return out;
}

}  // namespace

void SampledPath::validate(int d) const {
  if (t.size() < 2 || x.size() != t.size()) throw InvalidArgument("sampled path needs >= 2 samples with matching times");
  if (!v.empty() && v.size() != t.size()) throw InvalidArgument("sampled path velocity count mismatch");
  for (std::size_t n = 0; n < t.size(); ++n) {
    if (x[n].size() != d || (!v.empty() && v[n].size() != d))
      throw InvalidArgument("sampled path dimension mismatch");
    if (n > 0 && t[n] < t[n - 1]) throw InvalidArgument("sampled path times must be nondecreasing");
  }
}

void SampledPath::ensure_velocities() {
  if (v.empty()) v = detail::estimate_derivatives(t, x);
}

namespace detail {

std::vector<Vec> estimate_derivatives(const std::vector<double>& t, const std::vector<Vec>& x) {
  const int n_samples = static_cast<int>(t.size());
  std::vector<Vec> v(n_samples);
  int start = 0;
  while (start < n_samples) {
    int end = start;
    while (end + 1 < n_samples && t[end + 1] > t[end]) ++end;
    const int len = end - start + 1;
    for (int n = start; n <= end; ++n) {
      if (len == 1) {
        v[n] = Vec::Zero(x[n].size());
        continue;
      }
      const int w = std::min(len, 5);
      const int lo = std::clamp(n - w / 2, start, end - w + 1);
      v[n] = lagrange_derivative(t, x, n, lo, lo + w - 1);
    }
    start = end + 1;
  }
  return v;
}

void hermite(double t0, double t1, const Vec& x0, const Vec& x1, const Vec& v0, const Vec& v1, double t, Vec& x,
             Vec& v) {
  const double h = t1 - t0;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s, h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  const double d00 = 6 * s2 - 6 * s, d10 = 3 * s2 - 4 * s + 1, d01 = -6 * s2 + 6 * s, d11 = 3 * s2 - 2 * s;
  x = h00 * x0 + h10 * h * v0 + h01 * x1 + h11 * h * v1;
  v = (d00 * x0 + d01 * x1) / h + d10 * v0 + d11 * v1;
}

}  // namespace detail

std::vector<Mat> parallel_transport(const ChartManifold& M, SampledPath path, const Mat& u0, int substeps) {
  const int d = M.dim();
  path.validate(d);
  path.ensure_velocities();
  if (u0.rows() != d) throw InvalidArgument("parallel_transport: frame row count must equal manifold dimension");
  if (substeps < 1) throw InvalidArgument("parallel_transport: substeps must be >= 1");
  const int k = static_cast<int>(u0.cols());

  std::vector<Mat> frames;
  frames.reserve(path.size());
  frames.push_back(u0);
  Mat u = u0;
  Vec x, v;
  auto field = [&](double t, const Mat& uu, std::size_t n) {
    detail::hermite(path.t[n], path.t[n + 1], path.x[n], path.x[n + 1], path.v[n], path.v[n + 1], t, x, v);
    const GeometryJet J = M.geometry_jet(x);
    Mat du = Mat::Zero(d, k);
    for (int a = 0; a < k; ++a)
      for (int i = 0; i < d; ++i) {
        double s = 0.0;
        for (int j = 0; j < d; ++j)
          for (int l = 0; l < d; ++l) s -= J.gamma(i, j, l) * v[j] * uu(l, a);
        du(i, a) = s;
      }
    return du;
  };
  for (std::size_t n = 0; n + 1 < path.size(); ++n) {
    const double t0 = path.t[n], t1 = path.t[n + 1];
    if (t1 > t0) {
      const double h = (t1 - t0) / substeps;
      for (int s = 0; s < substeps; ++s) {
        const double t = t0 + s * h;
        const double te = (s + 1 == substeps) ? t1 : t + h;
        const double tm = 0.5 * (t + te);
        const Mat k1 = field(t, u, n);
        const Mat k2 = field(tm, u + 0.5 * h * k1, n);
        const Mat k3 = field(tm, u + 0.5 * h * k2, n);
        const Mat k4 = field(te, u + h * k3, n);
        u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
    }
    frames.push_back(u);
  }
  return frames;
}

double log_det_frame(const ChartManifold& M, const Vec& x, const Mat& u) {
  if (u.rows() != M.dim() || u.cols() < 1 || u.cols() > M.dim())
    throw InvalidArgument("log_det_frame: frame shape mismatch");
  const Mat gram = u.transpose() * M.metric(x) * u;
  Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() > 1e-24 * std::max(1.0, es.eigenvalues().maxCoeff())))
    throw DegenerateFrameError("log_det_frame: frame is rank deficient");
  Eigen::LLT<Mat> llt(gram);
  if (llt.info() != Eigen::Success) throw DegenerateFrameError("log_det_frame: frame is rank deficient");
  const Mat L = llt.matrixL();
  double s = 0.0;
  for (int a = 0; a < L.rows(); ++a) {
    if (!(L(a, a) > 0.0)) throw DegenerateFrameError("log_det_frame: frame is rank deficient");
    s += std::log(L(a, a));
  }
  return s;
}

}  // namespace mppgeo
