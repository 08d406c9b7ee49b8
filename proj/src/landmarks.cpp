#include "mppgeo/landmarks.hpp"

#include <array>
#include <cmath>
#include <sstream>

namespace mppgeo {

LandmarkManifold::LandmarkManifold(int n_landmarks, int amb, double sigma) : n_(n_landmarks), amb_(amb), sigma_(sigma) {
  if (n_ < 1) throw InvalidArgument("landmark count must be >= 1");
  if (amb_ < 1) throw InvalidArgument("landmark ambient dimension must be >= 1");
  if (!(sigma_ > 0.0) || !std::isfinite(sigma_)) throw InvalidArgument("kernel width sigma must be positive");
}

double LandmarkManifold::kernel(const Vec& p, const Vec& q) const {
  return std::exp(-(p - q).squaredNorm() / (2.0 * sigma_ * sigma_));
}

bool LandmarkManifold::in_domain(const Vec& x) const {
  if (x.size() != dim() || !x.allFinite()) return false;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if ((x.segment(i * amb_, amb_) - x.segment(j * amb_, amb_)).norm() < kCoincidence) return false;
  return true;
}

void LandmarkManifold::check_distinct(const Vec& x) const {
  if (x.size() != dim()) throw InvalidArgument("landmark configuration has the wrong size");
  if (!x.allFinite()) throw ChartDomainError("landmark configuration is not finite");
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if ((x.segment(i * amb_, amb_) - x.segment(j * amb_, amb_)).norm() < kCoincidence) {
        std::ostringstream os;
        os << "landmarks " << i << " and " << j << " coincide; kernel matrix is singular";
        throw SingularMetricError(os.str(), i, j);
      }
}

Mat landmark_cometric(const LandmarkManifold& L, const Vec& p) {
  L.check_distinct(p);
  const int n = L.landmarks(), m = L.amb(), d = L.dim();
  Mat G = Mat::Zero(d, d);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      const double k = L.kernel(p.segment(i * m, m), p.segment(j * m, m));
      for (int a = 0; a < m; ++a) {
        G(i * m + a, j * m + a) = k;
        G(j * m + a, i * m + a) = k;
      }
    }
  return G;
}

Tensor3 landmark_cometric_deriv(const LandmarkManifold& L, const Vec& p) {
  L.check_distinct(p);
  const int n = L.landmarks(), m = L.amb(), d = L.dim();
  const double s2 = L.sigma() * L.sigma();
  Tensor3 out(d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vec delta = p.segment(i * m, m) - p.segment(j * m, m);
      const double k = std::exp(-delta.squaredNorm() / (2.0 * s2));
      for (int q = 0; q < m; ++q) {
        // ∂_{p_i^q} K = −K Δ^q / σ², ∂_{p_j^q} K = +K Δ^q / σ²
        const double dk = -k * delta[q] / s2;
        for (int a = 0; a < m; ++a) {
          out(i * m + a, j * m + a, i * m + q) = dk;
          out(i * m + a, j * m + a, j * m + q) = -dk;
        }
      }
    }
  return out;
}

Tensor4 landmark_cometric_second_deriv(const LandmarkManifold& L, const Vec& p) {
  L.check_distinct(p);
  const int n = L.landmarks(), m = L.amb(), d = L.dim();
  const double s2 = L.sigma() * L.sigma();
  Tensor4 out(d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const Vec delta = p.segment(i * m, m) - p.segment(j * m, m);
      const double k = std::exp(-delta.squaredNorm() / (2.0 * s2));
      const std::array<int, 2> lm{i, j};
      const std::array<double, 2> sign{1.0, -1.0};
      for (int q = 0; q < m; ++q)
        for (int t = 0; t < m; ++t) {
          // K [Δ^q Δ^t / σ⁴ − δ_qt / σ²] e f with e, f = ±1
          const double base = k * (delta[q] * delta[t] / (s2 * s2) - (q == t ? 1.0 / s2 : 0.0));
          for (int r = 0; r < 2; ++r)
            for (int s = 0; s < 2; ++s) {
              const double val = base * sign[r] * sign[s];
              for (int a = 0; a < m; ++a) out(i * m + a, j * m + a, lm[r] * m + q, lm[s] * m + t) = val;
            }
        }
    }
  return out;
}

GeometryJet landmark_christoffel(const LandmarkManifold& L, const Vec& p) {
  const int d = L.dim();
  const Mat Ginv = landmark_cometric(L, p);
  const Tensor3 C = landmark_cometric_deriv(L, p);
  const Tensor4 D = landmark_cometric_second_deriv(L, p);

  Eigen::LLT<Mat> llt(Ginv);
  if (llt.info() != Eigen::Success) throw SingularMetricError("landmark kernel matrix is not positive definite");
  GeometryJet J;
  J.x = p;
  J.g_inv = Ginv;
  J.g = llt.solve(Mat::Identity(d, d));
  J.g = 0.5 * (J.g + J.g.transpose());
  J.cometric_deriv = C;
  const Mat& g = J.g;

  // Cm[m](r, s) = ∂_m g^rs, dg[m] = ∂_m g_ab = −g Cm g
  std::vector<Mat> Cm(d, Mat(d, d)), dg(d);
  for (int m = 0; m < d; ++m) {
    for (int r = 0; r < d; ++r)
      for (int s = 0; s < d; ++s) Cm[m](r, s) = C(r, s, m);
    dg[m] = -g * Cm[m] * g;
  }
  auto Dm = [&](int l, int m) {
    Mat out(d, d);
    for (int r = 0; r < d; ++r)
      for (int s = 0; s < d; ++s) out(r, s) = D(r, s, l, m);
    return out;
  };
  std::vector<std::vector<Mat>> DD(d, std::vector<Mat>(d));
  for (int l = 0; l < d; ++l)
    for (int m = 0; m < d; ++m) DD[l][m] = Dm(l, m);

  // Γ^k_ij = ½[(g A^k g)_ij − Σ_b g_bi ∂_j g^kb − Σ_s ∂_i g^ks g_sj], A^k(r, s) = g^kl ∂_l g^rs
  J.gamma = Tensor3(d);
  J.gamma_deriv = Tensor4(d);
  for (int k = 0; k < d; ++k) {
    Mat A = Mat::Zero(d, d);
    for (int l = 0; l < d; ++l) A += Ginv(k, l) * Cm[l];
    const Mat T1 = g * A * g;
    Mat T23(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        double t2 = 0.0, t3 = 0.0;
        for (int b = 0; b < d; ++b) {
          t2 += g(b, i) * Cm[j](k, b);
          t3 += Cm[i](k, b) * g(b, j);
        }
        T23(i, j) = t2 + t3;
      }
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) J.gamma(k, i, j) = 0.5 * (T1(i, j) - T23(i, j));

    for (int m = 0; m < d; ++m) {
      Mat dA = Mat::Zero(d, d);
      for (int l = 0; l < d; ++l) dA += Cm[m](k, l) * Cm[l] + Ginv(k, l) * DD[l][m];
      const Mat dT1 = dg[m] * A * g + g * dA * g + g * A * dg[m];
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
          double t2 = 0.0, t3 = 0.0;
          for (int b = 0; b < d; ++b) {
            t2 += dg[m](b, i) * Cm[j](k, b) + g(b, i) * DD[j][m](k, b);
            t3 += DD[i][m](k, b) * g(b, j) + Cm[i](k, b) * dg[m](b, j);
          }
          J.gamma_deriv(k, i, j, m) = 0.5 * (dT1(i, j) - t2 - t3);
        }
    }
  }
  // exact lower-index symmetry
  for (int k = 0; k < d; ++k)
    for (int i = 0; i < d; ++i)
      for (int j = i + 1; j < d; ++j) {
        const double s = 0.5 * (J.gamma(k, i, j) + J.gamma(k, j, i));
        J.gamma(k, i, j) = J.gamma(k, j, i) = s;
        for (int m = 0; m < d; ++m) {
          const double t = 0.5 * (J.gamma_deriv(k, i, j, m) + J.gamma_deriv(k, j, i, m));
          J.gamma_deriv(k, i, j, m) = J.gamma_deriv(k, j, i, m) = t;
        }
      }
  return J;
}

namespace {

template <int D>
GeometryJet metric_route_impl(const LandmarkManifold& L, const Vec& p) {
  using J = Jet<D>;
  const int n = L.landmarks(), m = L.amb();
  const double s2 = L.sigma() * L.sigma();
  std::array<J, D> x;
  for (int a = 0; a < D; ++a) x[a] = J::variable(p[a], a);

  std::array<std::array<J, D>, D> G;
  for (auto& row : G) row.fill(J(0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      J r2(0.0);
      for (int a = 0; a < m; ++a) {
        const J diff = x[i * m + a] - x[j * m + a];
        r2 += diff * diff;
      }
      const J k = exp(r2 * (-1.0 / (2.0 * s2)));
      for (int a = 0; a < m; ++a) G[i * m + a][j * m + a] = k;
    }

  // Gauss-Jordan inversion in jet arithmetic; the kernel matrix is SPD so no pivoting
  std::array<std::array<J, D>, D> inv;
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) inv[a][b] = J(a == b ? 1.0 : 0.0);
  for (int c = 0; c < D; ++c) {
    const J piv = reciprocal(G[c][c]);
    for (int b = 0; b < D; ++b) {
      G[c][b] = G[c][b] * piv;
      inv[c][b] = inv[c][b] * piv;
    }
    for (int r = 0; r < D; ++r) {
      if (r == c) continue;
      const J f = G[r][c];
      for (int b = 0; b < D; ++b) {
        G[r][b] -= f * G[c][b];
        inv[r][b] -= f * inv[c][b];
      }
    }
  }

  Mat g(D, D);
  Tensor3 dg(D);
  Tensor4 ddg(D);
  for (int a = 0; a < D; ++a)
    for (int b = 0; b < D; ++b) {
      g(a, b) = inv[a][b].v;
      for (int q = 0; q < D; ++q) {
        dg(a, b, q) = inv[a][b].d[q];
        for (int r = 0; r < D; ++r) ddg(a, b, q, r) = inv[a][b].hess(q, r);
      }
    }
  g = 0.5 * (g + g.transpose());
  return christoffel_from_metric(p, g, dg, ddg);
}

}  // namespace

GeometryJet metric_route_christoffel(const LandmarkManifold& L, const Vec& p) {
  L.check_distinct(p);
  switch (L.dim()) {
    case 1:
      return metric_route_impl<1>(L, p);
    case 2:
      return metric_route_impl<2>(L, p);
    case 3:
      return metric_route_impl<3>(L, p);
    case 4:
      return metric_route_impl<4>(L, p);
    case 5:
      return metric_route_impl<5>(L, p);
    case 6:
      return metric_route_impl<6>(L, p);
    case 7:
      return metric_route_impl<7>(L, p);
    case 8:
      return metric_route_impl<8>(L, p);
    default:
      throw InvalidArgument("metric_route_christoffel supports landmark dimension <= 8");
  }
}

GeometryJet LandmarkManifold::geometry_jet(const Vec& x) const { return landmark_christoffel(*this, x); }

Mat LandmarkManifold::cometric(const Vec& x) const { return landmark_cometric(*this, x); }

Mat LandmarkManifold::metric(const Vec& x) const {
  const Mat G = landmark_cometric(*this, x);
  Eigen::LLT<Mat> llt(G);
  if (llt.info() != Eigen::Success) throw SingularMetricError("landmark kernel matrix is not positive definite");
  return llt.solve(Mat::Identity(dim(), dim()));
}

Vec landmark_interpolated_velocity(const LandmarkManifold& L, const Vec& p, const Vec& pdot, const Vec& y) {
  const int n = L.landmarks(), m = L.amb();
  if (y.size() != m) throw InvalidArgument("interpolation point has the wrong dimension");
  Mat K(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) K(i, j) = L.kernel(p.segment(i * m, m), p.segment(j * m, m));
  Mat V(n, m);
  for (int i = 0; i < n; ++i) V.row(i) = pdot.segment(i * m, m).transpose();
  const Mat alpha = K.llt().solve(V);
  Vec out = Vec::Zero(m);
  for (int i = 0; i < n; ++i) out += L.kernel(y, p.segment(i * m, m)) * alpha.row(i).transpose();
  return out;
}

}  // namespace mppgeo
