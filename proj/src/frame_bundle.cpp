#include "mppgeo/frame_bundle.hpp"

#include <cmath>
#include <sstream>

namespace mppgeo {

double smallest_singular_value(const Mat& u) {
  if (u.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(u);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

void FramePoint::validate(double rank_tolerance) const {
  const int dd = d();
  if (dd < 1) throw InvalidArgument("frame point has empty base point");
  if (u.rows() != dd) throw InvalidArgument("frame rows must equal the manifold dimension");
  if (k() < 1 || k() > dd) throw InvalidArgument("frame rank k must satisfy 1 <= k <= d");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be finite and >= 0");
  if (!u.allFinite()) throw InvalidArgument("frame has non-finite entries");
  const double smin = smallest_singular_value(u);
  if (!(smin > rank_tolerance)) {
    std::ostringstream os;
    os << "frame is rank deficient (smallest singular value " << smin << ")";
    throw DegenerateFrameError(os.str());
  }
  if (lambda == 0.0 && k() < dd) throw DegenerateFrameError("lambda = 0 requires k = d; the cometric is degenerate");
}

Vec CotangentState::flatten() const {
  const StateLayout L = layout();
  if (xi_x.size() != L.d || xi_u.rows() != L.d || xi_u.cols() != L.k)
    throw InvalidArgument("cotangent state momentum shape mismatch");
  Vec z(L.size());
  z.segment(L.x(), L.d) = point.x;
  z.segment(L.u(), L.d * L.k) = Eigen::Map<const Vec>(point.u.data(), L.d * L.k);
  z.segment(L.xi_x(), L.d) = xi_x;
  z.segment(L.xi_u(), L.d * L.k) = Eigen::Map<const Vec>(xi_u.data(), L.d * L.k);
  return z;
}

CotangentState CotangentState::unflatten(const Vec& z, int d, int k, double lambda) {
  const StateLayout L{d, k};
  if (z.size() != L.size()) throw InvalidArgument("flat state has the wrong size");
  CotangentState s;
  s.point.x = z.segment(L.x(), d);
  s.point.u = Eigen::Map<const Mat>(z.data() + L.u(), d, k);
  s.point.lambda = lambda;
  s.xi_x = z.segment(L.xi_x(), d);
  s.xi_u = Eigen::Map<const Mat>(z.data() + L.xi_u(), d, k);
  return s;
}

Vec CotangentState::momentum() const {
  const StateLayout L = layout();
  Vec m(L.d + L.d * L.k);
  m.head(L.d) = xi_x;
  m.tail(L.d * L.k) = Eigen::Map<const Vec>(xi_u.data(), L.d * L.k);
  return m;
}

Mat CometricBlocks::assembled() const {
  const int d = static_cast<int>(Gxx.rows());
  const int dk = static_cast<int>(Guu.rows());
  Mat G(d + dk, d + dk);
  G.topLeftCorner(d, d) = Gxx;
  G.topRightCorner(d, dk) = Gxu;
  G.bottomLeftCorner(dk, d) = Gux;
  G.bottomRightCorner(dk, dk) = Guu;
  return G;
}

Mat frame_christoffel(const GeometryJet& J, const Mat& u) {
  const int d = J.dim();
  const int k = static_cast<int>(u.cols());
  Mat Gf = Mat::Zero(d * k, d);
  for (int g = 0; g < k; ++g)
    for (int h = 0; h < d; ++h)
      for (int j = 0; j < d; ++j) {
        double s = 0.0;
        for (int i = 0; i < d; ++i) s += J.gamma(h, j, i) * u(i, g);
        Gf(h + d * g, j) = s;
      }
  return Gf;
}

namespace {

CometricBlocks blocks_from_w(const GeometryJet& J, const Mat& u, Mat W) {
  CometricBlocks B;
  B.gamma_frame = frame_christoffel(J, u);
  B.W = std::move(W);
  B.Gxx = B.W;
  B.Gxu = -B.W * B.gamma_frame.transpose();
  B.Gux = -B.gamma_frame * B.W;
  B.Guu = B.gamma_frame * B.W * B.gamma_frame.transpose();
  return B;
}

}  // namespace

CometricBlocks cometric_blocks_full_rank(const GeometryJet& J, const Mat& u) {
  return blocks_from_w(J, u, u * u.transpose());
}

CometricBlocks cometric_blocks_low_rank(const GeometryJet& J, const Mat& u, double lambda) {
  Mat W = u * u.transpose();
  W += lambda * J.g_inv;
  return blocks_from_w(J, u, std::move(W));
}

CometricBlocks cometric_blocks(const ChartManifold& M, const FramePoint& s) {
  s.validate();
  const GeometryJet J = M.geometry_jet(s.x);
  if (s.k() == s.d() && s.lambda == 0.0) return cometric_blocks_full_rank(J, s.u);
  return cometric_blocks_low_rank(J, s.u, s.lambda);
}

double hamiltonian(const ChartManifold& M, const CotangentState& z) {
  const GeometryJet J = M.geometry_jet(z.point.x);
  const CometricBlocks B = (z.point.k() == z.point.d() && z.point.lambda == 0.0)
                               ? cometric_blocks_full_rank(J, z.point.u)
                               : cometric_blocks_low_rank(J, z.point.u, z.point.lambda);
  const Vec m = z.momentum();
  return 0.5 * m.dot(B.assembled() * m);
}

double hamiltonian(const ChartManifold& M, const Vec& z, int k, double lambda) {
  return hamiltonian(M, CotangentState::unflatten(z, M.dim(), k, lambda));
}

Vec horizontal_covector(const GeometryJet& J, const Vec& z, int k) {
  const int d = J.dim();
  const StateLayout L{d, k};
  Eigen::Map<const Mat> u(z.data() + L.u(), d, k);
  Eigen::Map<const Mat> xu(z.data() + L.xi_u(), d, k);
  Vec p = z.segment(L.xi_x(), d);
  for (int j = 0; j < d; ++j) {
    double s = 0.0;
    for (int g = 0; g < k; ++g)
      for (int h = 0; h < d; ++h) {
        double gf = 0.0;
        for (int i = 0; i < d; ++i) gf += J.gamma(h, j, i) * u(i, g);
        s += gf * xu(h, g);
      }
    p[j] -= s;
  }
  return p;
}

namespace {

Vec mpp_rhs_impl(const GeometryJet& J, const Vec& z, int k, double lambda, bool low_rank) {
  const int d = J.dim();
  const StateLayout L{d, k};
  if (z.size() != L.size()) throw InvalidArgument("mpp_rhs: state has the wrong size");
  Eigen::Map<const Mat> u(z.data() + L.u(), d, k);
  Eigen::Map<const Mat> xu(z.data() + L.xi_u(), d, k);

  const Mat Gf = frame_christoffel(J, u);
  const Vec p = z.segment(L.xi_x(), d) - Gf.transpose() * Eigen::Map<const Vec>(xu.data(), d * k);
  Mat W = u * u.transpose();
  if (low_rank) W += lambda * J.g_inv;
  const Vec xdot = W * p;

  Vec dz(L.size());
  dz.segment(L.x(), d) = xdot;
  dz.segment(L.u(), d * k) = -Gf * xdot;

  // M_hi = ξ_hγ u^i_γ
  const Mat Mh = xu * u.transpose();
  for (int l = 0; l < d; ++l) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      if (xdot[j] == 0.0) continue;
      double t = 0.0;
      for (int h = 0; h < d; ++h)
        for (int i = 0; i < d; ++i) t += J.gamma_deriv(h, j, i, l) * Mh(h, i);
      s += xdot[j] * t;
    }
    if (low_rank) {
      double c = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) c += p[i] * J.cometric_deriv(i, j, l) * p[j];
      s -= 0.5 * lambda * c;
    }
    dz[L.xi_x() + l] = s;
  }

  const Vec up = u.transpose() * p;
  for (int g = 0; g < k; ++g)
    for (int l = 0; l < d; ++l) {
      double s = -p[l] * up[g];
      for (int j = 0; j < d; ++j) {
        double t = 0.0;
        for (int h = 0; h < d; ++h) t += J.gamma(h, j, l) * xu(h, g);
        s += xdot[j] * t;
      }
      dz[L.xi_u() + l + d * g] = s;
    }
  return dz;
}

}  // namespace

Vec mpp_rhs_full_rank(const GeometryJet& J, const Vec& z, int k) { return mpp_rhs_impl(J, z, k, 0.0, false); }

Vec mpp_rhs_low_rank(const GeometryJet& J, const Vec& z, int k, double lambda) {
  return mpp_rhs_impl(J, z, k, lambda, true);
}

Vec mpp_rhs(const ChartManifold& M, const Vec& z, int k, double lambda) {
  const int d = M.dim();
  const GeometryJet J = M.geometry_jet(z.head(d));
  if (k == d && lambda == 0.0) return mpp_rhs_full_rank(J, z, k);
  return mpp_rhs_low_rank(J, z, k, lambda);
}

VectorField mpp_field(const ChartManifold& M, int k, double lambda, bool force_low_rank) {
  const bool low = force_low_rank || k != M.dim() || lambda != 0.0;
  return [&M, k, lambda, low](double, const Vec& z) {
    const GeometryJet J = M.geometry_jet(z.head(M.dim()));
    return low ? mpp_rhs_low_rank(J, z, k, lambda) : mpp_rhs_full_rank(J, z, k);
  };
}

Trajectory integrate_mpp(const ChartManifold& M, const CotangentState& z0, const IntegratorConfig& cfg,
                         const MppOptions& opts) {
  z0.point.validate(opts.rank_tolerance);
  M.check_domain(z0.point.x);
  const int d = M.dim(), k = z0.point.k();
  const double lambda = z0.point.lambda;
  Trajectory tr = integrate(mpp_field(M, k, lambda, opts.force_low_rank), z0.flatten(), cfg);
  tr.chart = M.name();
  tr.hamiltonian.reserve(tr.size());
  bool warned = false;
  const StateLayout L{d, k};
  for (std::size_t n = 0; n < tr.size(); ++n) {
    tr.hamiltonian.push_back(hamiltonian(M, tr.z[n], k, lambda));
    if (!warned) {
      const Mat u = Eigen::Map<const Mat>(tr.z[n].data() + L.u(), d, k);
      const double smin = smallest_singular_value(u);
      if (!(smin > opts.rank_tolerance)) {
        std::ostringstream os;
        os << "warning: frame degenerate at t=" << tr.t[n] << " (smallest singular value " << smin << ")";
        tr.diagnostics.push_back(os.str());
        warned = true;
      }
    }
  }
  return tr;
}

SampledPath FramePath::base_path() const { return SampledPath{t, x, xdot}; }

FramePath frame_path_from_mpp(const ChartManifold& M, const Trajectory& tr, int k, double lambda) {
  const int d = M.dim();
  const StateLayout L{d, k};
  FramePath fp;
  fp.t = tr.t;
  for (const Vec& z : tr.z) {
    if (z.size() != L.size()) throw InvalidArgument("frame_path_from_mpp: state has the wrong size");
    const Vec dz = mpp_rhs(M, z, k, lambda);
    fp.x.push_back(z.head(d));
    fp.xdot.push_back(dz.head(d));
    fp.u.push_back(Eigen::Map<const Mat>(z.data() + L.u(), d, k));
  }
  // frame velocities are left to be differenced from the samples so that the
  // horizontality residual measures the integrated frames themselves
  return fp;
}

void PiecewiseLinearPath::validate(int d) const {
  if (t.size() < 2 || s.size() != t.size()) throw InvalidArgument("driver needs >= 2 knots with matching values");
  for (std::size_t n = 0; n < t.size(); ++n) {
    if (s[n].size() != d) throw InvalidArgument("driver dimension mismatch");
    if (n > 0 && !(t[n] > t[n - 1])) throw InvalidArgument("driver knot times must be strictly increasing");
  }
  if (t.front() != 0.0) throw InvalidArgument("driver must start at t = 0");
  if (s.front().norm() != 0.0) throw InvalidArgument("driver must start at s = 0");
}

namespace {

Mat horizontal_frame_velocity(const GeometryJet& J, const Vec& v, const Mat& u) {
  const int d = J.dim();
  const int k = static_cast<int>(u.cols());
  Mat du(d, k);
  for (int a = 0; a < k; ++a)
    for (int i = 0; i < d; ++i) {
      double s = 0.0;
      for (int j = 0; j < d; ++j)
        for (int l = 0; l < d; ++l) s -= J.gamma(i, j, l) * v[j] * u(l, a);
      du(i, a) = s;
    }
  return du;
}

}  // namespace

FramePath develop(const ChartManifold& M, const FramePoint& u0, const PiecewiseLinearPath& s, int steps_per_segment) {
  const int d = M.dim();
  u0.validate();
  if (u0.k() != d) throw InvalidArgument("develop requires a full frame (k = d)");
  if (u0.d() != d) throw InvalidArgument("develop: base point dimension mismatch");
  s.validate(d);
  if (steps_per_segment < 1) throw InvalidArgument("develop: steps_per_segment must be >= 1");
  M.check_domain(u0.x);

  FramePath out;
  Vec x = u0.x;
  Mat u = u0.u;
  auto record = [&](double t, const Vec& sdot) {
    const GeometryJet J = M.geometry_jet(x);
    const Vec v = u * sdot;
    out.t.push_back(t);
    out.x.push_back(x);
    out.xdot.push_back(v);
    out.u.push_back(u);
    out.udot.push_back(horizontal_frame_velocity(J, v, u));
  };
  for (std::size_t n = 0; n + 1 < s.t.size(); ++n) {
    const double t0 = s.t[n], t1 = s.t[n + 1];
    const Vec sdot = (s.s[n + 1] - s.s[n]) / (t1 - t0);
    auto f = [&](const Vec& xx, const Mat& uu, Vec& dx, Mat& du) {
      const GeometryJet J = M.geometry_jet(xx);
      dx = uu * sdot;
      du = horizontal_frame_velocity(J, dx, uu);
    };
    const double h = (t1 - t0) / steps_per_segment;
    record(t0, sdot);
    Vec k1x, k2x, k3x, k4x;
    Mat k1u, k2u, k3u, k4u;
    for (int m = 0; m < steps_per_segment; ++m) {
      f(x, u, k1x, k1u);
      f(x + 0.5 * h * k1x, u + 0.5 * h * k1u, k2x, k2u);
      f(x + 0.5 * h * k2x, u + 0.5 * h * k2u, k3x, k3u);
      f(x + h * k3x, u + h * k3u, k4x, k4u);
      x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
      record(m + 1 == steps_per_segment ? t1 : t0 + (m + 1) * h, sdot);
    }
  }
  return out;
}

std::vector<Vec> antidevelop(const ChartManifold& M, const Mat& u0, SampledPath path, int substeps) {
  const int d = M.dim();
  path.validate(d);
  path.ensure_velocities();
  if (u0.rows() != d || u0.cols() != d) throw InvalidArgument("antidevelop requires a full d×d frame");
  if (substeps < 1) throw InvalidArgument("antidevelop: substeps must be >= 1");

  auto inverse_apply = [](const Mat& u, const Vec& v) {
    Eigen::ColPivHouseholderQR<Mat> qr(u);
    qr.setThreshold(1e-12);
    if (qr.rank() < u.cols()) throw DegenerateFrameError("antidevelop: transported frame became singular");
    return Vec(qr.solve(v));
  };

  std::vector<Vec> out;
  out.reserve(path.size());
  Vec s = Vec::Zero(d);
  Mat u = u0;
  out.push_back(s);
  Vec x, v;
  auto f = [&](double t, const Mat& uu, std::size_t n, Mat& du, Vec& ds) {
    detail::hermite(path.t[n], path.t[n + 1], path.x[n], path.x[n + 1], path.v[n], path.v[n + 1], t, x, v);
    const GeometryJet J = M.geometry_jet(x);
    du = horizontal_frame_velocity(J, v, uu);
    ds = inverse_apply(uu, v);
  };
  Mat k1u, k2u, k3u, k4u;
  Vec k1s, k2s, k3s, k4s;
  for (std::size_t n = 0; n + 1 < path.size(); ++n) {
    const double t0 = path.t[n], t1 = path.t[n + 1];
    if (t1 > t0) {
      const double h = (t1 - t0) / substeps;
      for (int m = 0; m < substeps; ++m) {
        const double t = t0 + m * h;
        const double te = (m + 1 == substeps) ? t1 : t + h;
        const double tm = 0.5 * (t + te);
        f(t, u, n, k1u, k1s);
        f(tm, u + 0.5 * h * k1u, n, k2u, k2s);
        f(tm, u + 0.5 * h * k2u, n, k3u, k3s);
        f(te, u + h * k3u, n, k4u, k4s);
        u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        s += (h / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
      }
    }
    out.push_back(s);
  }
  return out;
}

double horizontality_residual(const ChartManifold& M, const FramePath& path) {
  const std::size_t n = path.size();
  if (n == 0) return 0.0;
  if (path.x.size() != n || path.xdot.size() != n || path.u.size() != n)
    throw InvalidArgument("horizontality_residual: inconsistent frame path");
  std::vector<Mat> udot = path.udot;
  if (udot.empty()) {
    const int d = static_cast<int>(path.u[0].rows()), k = static_cast<int>(path.u[0].cols());
    std::vector<Vec> flat;
    flat.reserve(n);
    for (const Mat& u : path.u) flat.push_back(Eigen::Map<const Vec>(u.data(), u.size()));
    const std::vector<Vec> dflat = detail::estimate_derivatives(path.t, flat);
    for (const Vec& v : dflat) udot.push_back(Eigen::Map<const Mat>(v.data(), d, k));
  }
  double worst = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    const GeometryJet J = M.geometry_jet(path.x[m]);
    const Mat r = udot[m] - horizontal_frame_velocity(J, path.xdot[m], path.u[m]);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

double sub_riemannian_energy(const ChartManifold& M, const FramePath& path, double lambda,
                             double horizontality_tolerance) {
  const double res = horizontality_residual(M, path);
  if (!(res <= horizontality_tolerance)) {
    std::ostringstream os;
    os << "sub_riemannian_energy: path is not horizontal (residual " << res << ")";
    throw InvalidArgument(os.str());
  }
  std::vector<double> e(path.size());
  for (std::size_t m = 0; m < path.size(); ++m) {
    Mat W = path.u[m] * path.u[m].transpose();
    if (lambda != 0.0) W += lambda * M.cometric(path.x[m]);
    Eigen::LDLT<Mat> ldlt(W);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0)
      throw DegenerateFrameError("sub_riemannian_energy: W is singular");
    e[m] = path.xdot[m].dot(ldlt.solve(path.xdot[m]));
  }
  double total = 0.0;
  for (std::size_t m = 0; m + 1 < path.size(); ++m) total += 0.5 * (path.t[m + 1] - path.t[m]) * (e[m] + e[m + 1]);
  return total;
}

CovariantAcceleration covariant_acceleration(const ChartManifold& M, const Trajectory& tr, int k, double lambda) {
  const int d = M.dim();
  if (k != d || lambda != 0.0) throw InvalidArgument("covariant_acceleration requires k = d and lambda = 0");
  const StateLayout L{d, k};
  CovariantAcceleration out;
  out.t = tr.t;
  std::vector<Vec> coords;
  coords.reserve(tr.size());
  for (const Vec& z : tr.z) {
    const GeometryJet J = M.geometry_jet(z.head(d));
    Eigen::Map<const Mat> u(z.data() + L.u(), d, k);
    Eigen::Map<const Mat> xu(z.data() + L.xi_u(), d, k);
    const Vec p = horizontal_covector(J, z, k);
    coords.push_back(u.transpose() * p);
    const Vec xdot = u * (u.transpose() * p);
    const Tensor4 R = curvature(J);
    // ξ_hγ [R(u_α, ẋ)u_γ]^h with R(X, Y)Z^s = R_ijk^s Y^i X^j Z^k
    Vec b = Vec::Zero(k);
    for (int a = 0; a < k; ++a)
      for (int g = 0; g < k; ++g)
        for (int h = 0; h < d; ++h) {
          if (xu(h, g) == 0.0) continue;
          double r = 0.0;
          for (int m = 0; m < d; ++m)
            for (int j = 0; j < d; ++j)
              for (int i = 0; i < d; ++i) r += R(m, j, i, h) * xdot[m] * u(j, a) * u(i, g);
          b[a] += xu(h, g) * r;
        }
    out.from_curvature.push_back(b);
  }
  out.from_frame_coordinates = detail::estimate_derivatives(tr.t, coords);
  return out;
}

}  // namespace mppgeo
