#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace mppgeo;
using testutil::vec;

namespace {

Vec random_config(std::mt19937_64& rng, int n) {
  Vec p(2 * n);
  for (int i = 0; i < n; ++i) {
    p[2 * i] = 0.8 * i + testutil::uniform(rng, -0.2, 0.2);
    p[2 * i + 1] = testutil::uniform(rng, -0.4, 0.4);
  }
  return p;
}

}  // namespace

TEST(LandmarkCometric, SingleLandmarkIsFlat) {
  LandmarkManifold L(1, 2, 0.5);
  EXPECT_TRUE(landmark_cometric(L, vec({0.3, 0.1})).isIdentity());
  EXPECT_EQ(landmark_cometric_deriv(L, vec({0.3, 0.1})).max_abs(), 0.0);
  const GeometryJet J = landmark_christoffel(L, vec({0.3, 0.1}));
  EXPECT_EQ(J.gamma.max_abs(), 0.0);
  EXPECT_EQ(J.gamma_deriv.max_abs(), 0.0);
}

TEST(LandmarkCometric, TwoLandmarkKernel) {
  LandmarkManifold L(2, 2, 1.0);
  const Vec p = vec({0, 0, 1, 0});
  const Mat G = landmark_cometric(L, p);
  const double e = std::exp(-0.5);
  EXPECT_NEAR(G(0, 2), e, 1e-15);
  EXPECT_NEAR(G(1, 3), e, 1e-15);
  EXPECT_EQ(G(0, 3), 0.0);
  EXPECT_EQ(G(0, 0), 1.0);
  const Tensor3 C = landmark_cometric_deriv(L, p);
  // ∂_{p_1^1} K(p_1, p_2) = −(p_1^1 − p_2^1) K / σ²
  EXPECT_NEAR(C(0, 2, 0), e, 1e-15);
  EXPECT_NEAR(C(0, 2, 2), -e, 1e-15);
}

TEST(LandmarkCometric, FarApartDecouples) {
  LandmarkManifold L(2, 2, 0.5);
  const Mat G = landmark_cometric(L, vec({0, 0, 10, 0}));
  EXPECT_LT(G(0, 2), 1e-80);
}

TEST(LandmarkCometric, CoincidentLandmarksReportPair) {
  LandmarkManifold L(3, 2, 0.5);
  try {
    landmark_cometric(L, vec({0, 0, 1, 0, 1, 0}));
    FAIL() << "expected SingularMetricError";
  } catch (const SingularMetricError& e) {
    EXPECT_EQ(e.first(), 1);
    EXPECT_EQ(e.second(), 2);
  }
}

TEST(LandmarkCometric, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(31);
  LandmarkManifold L(3, 2, 0.5);
  for (int n = 0; n < 10; ++n) {
    const Vec p = random_config(rng, 3);
    const Tensor3 C = landmark_cometric_deriv(L, p);
    const Tensor4 D = landmark_cometric_second_deriv(L, p);
    const double h = 1e-5;
    for (int r = 0; r < 6; ++r) {
      Vec e = Vec::Zero(6);
      e[r] = h;
      const Mat fd = (landmark_cometric(L, p + e) - landmark_cometric(L, p - e)) / (2 * h);
      const Tensor3 Cp = landmark_cometric_deriv(L, p + e), Cm = landmark_cometric_deriv(L, p - e);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
          EXPECT_NEAR(C(i, j, r), fd(i, j), 1e-6);
          for (int s = 0; s < 6; ++s) EXPECT_NEAR(D(i, j, s, r), (Cp(i, j, s) - Cm(i, j, s)) / (2 * h), 1e-5);
        }
    }
  }
}

TEST(LandmarkChristoffel, DualRouteAgreement) {
  std::mt19937_64 rng(32);
  for (int N : {1, 2, 3}) {
    LandmarkManifold L(N, 2, 0.5);
    for (int n = 0; n < 20; ++n) {
      const Vec p = random_config(rng, N);
      const GeometryJet a = landmark_christoffel(L, p), b = metric_route_christoffel(L, p);
      EXPECT_LE(testutil::max_diff(a.gamma, b.gamma), 1e-8) << "N=" << N;
      EXPECT_LE(testutil::max_diff(a.gamma_deriv, b.gamma_deriv), 1e-8) << "N=" << N;
      for (int k = 0; k < L.dim(); ++k)
        for (int i = 0; i < L.dim(); ++i)
          for (int j = 0; j < L.dim(); ++j) EXPECT_EQ(a.gamma(k, i, j), a.gamma(k, j, i));
    }
  }
}

TEST(LandmarkChristoffel, DerivativeMatchesFiniteDifferences) {
  std::mt19937_64 rng(33);
  for (int N : {1, 2, 3}) {
    LandmarkManifold L(N, 2, 0.5);
    const int d = L.dim();
    for (int n = 0; n < 5; ++n) {
      const Vec p = random_config(rng, N);
      const GeometryJet J = landmark_christoffel(L, p);
      EXPECT_LE(testutil::max_diff(J.gamma, testutil::fd_christoffel(L, p)), 1e-5);
      const double h = 1e-5;
      for (int l = 0; l < d; ++l) {
        Vec e = Vec::Zero(d);
        e[l] = h;
        const GeometryJet Jp = landmark_christoffel(L, p + e), Jm = landmark_christoffel(L, p - e);
        for (int k = 0; k < d; ++k)
          for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
              EXPECT_NEAR(J.gamma_deriv(k, i, j, l), (Jp.gamma(k, i, j) - Jm.gamma(k, i, j)) / (2 * h), 1e-5);
      }
    }
  }
}

TEST(LandmarkGeodesic, ConservesHamiltonian) {
  LandmarkManifold L(2, 2, 0.5);
  const Vec p0 = vec({0, 0, 0.6, 0.1});
  const Vec xi = vec({0.5, 0.2, -0.3, 0.4});
  const Vec v0 = landmark_cometric(L, p0) * xi;
  const Trajectory tr = riemannian_geodesic(L, p0, v0, {Scheme::kRk4, 1000, 1.0});
  ASSERT_TRUE(tr.ok());
  auto energy = [&](const Vec& z) { return 0.5 * z.tail(4).dot(L.metric(z.head(4)) * z.tail(4)); };
  const double H0 = energy(tr.z[0]);
  for (const Vec& z : tr.z) EXPECT_LE(std::abs(energy(z) - H0) / H0, 1e-6);
}

TEST(LandmarkMpp, StateSizeAndTranslationEquivariance) {
  for (int N : {1, 2, 3}) {
    for (int k : {1, 2}) {
      LandmarkManifold L(N, 2, 0.5);
      EXPECT_EQ(StateLayout({L.dim(), k}).size(), 2 * (2 * N + 2 * N * k));
    }
  }
  LandmarkManifold L(2, 2, 0.5);
  CotangentState z;
  z.point = {vec({0, 0, 1, 0}), Mat::Identity(4, 4) * 0.5, 0.0};
  z.point.u(0, 0) = 0.9;
  z.xi_x = vec({0.4, 0.1, -0.2, 0.3});
  z.xi_u = Mat::Zero(4, 4);
  z.xi_u(1, 2) = 0.3;
  EXPECT_EQ(z.flatten().size(), 2 * (4 + 4 * 4));
  const IntegratorConfig cfg{Scheme::kRk4, 200, 1.0};
  const Trajectory a = integrate_mpp(L, z, cfg);
  CotangentState w = z;
  w.point.x += vec({2.5, -1.25, 2.5, -1.25});
  const Trajectory b = integrate_mpp(L, w, cfg);
  EXPECT_LE((b.back().head(4) - a.back().head(4) - vec({2.5, -1.25, 2.5, -1.25})).norm(), 1e-10);
}

TEST(LandmarkInterpolation, ReproducesLandmarkVelocities) {
  LandmarkManifold L(2, 2, 0.5);
  const Vec p = vec({0, 0, 1, 0});
  const Vec v = vec({0.3, -0.1, 0.2, 0.5});
  EXPECT_LE((landmark_interpolated_velocity(L, p, v, vec({0, 0})) - vec({0.3, -0.1})).norm(), 1e-12);
  EXPECT_LE((landmark_interpolated_velocity(L, p, v, vec({1, 0})) - vec({0.2, 0.5})).norm(), 1e-12);
  EXPECT_LT(landmark_interpolated_velocity(L, p, v, vec({10, 10})).norm(), 1e-30);
}
