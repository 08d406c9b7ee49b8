#include <gtest/gtest.h>

#include "mppgeo/shooting.hpp"
#include "test_util.hpp"

using namespace mppgeo;
using testutil::vec;

namespace {

ManifoldPtr unit_sphere() { return make_surface({SurfaceKind::kSphere, 1.0}); }

// Chart point at polar angle θ from the north pole along azimuth φ.
Vec sphere_point(double theta, double phi) {
  const double r = std::tan(theta / 2.0);
  return vec({r * std::cos(phi), r * std::sin(phi)});
}

CotangentState sphere_anisotropic_state() {
  const ManifoldPtr S = unit_sphere();
  CotangentState z;
  z.point.x = vec({0.1, -0.2});
  z.point.u = testutil::orthonormal_frame(*S, z.point.x) * vec({1.6, 0.5}).asDiagonal();
  z.xi_x = vec({0.4, 0.3});
  z.xi_u = Mat::Zero(2, 2);
  z.xi_u(0, 1) = 0.2;
  return z;
}

Vec endpoint(const CotangentState& z, Scheme scheme, int steps) {
  const Trajectory tr = integrate_mpp(*unit_sphere(), z, {scheme, steps, 1.0});
  EXPECT_TRUE(tr.ok());
  return tr.back().head(2);
}

}  // namespace

TEST(LevenbergMarquardt, SolvesSmoothSystem) {
  auto f = [](const Vec& x) { return vec({x[0] * x[0] - 2.0, x[0] * x[1] - 1.0}); };
  const LmResult r = levenberg_marquardt(f, vec({1.0, 1.0}), {});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], std::sqrt(2.0), 1e-10);
  EXPECT_NEAR(r.x[1], 1.0 / std::sqrt(2.0), 1e-10);
}

TEST(LevenbergMarquardt, RejectsThrowingTrials) {
  auto f = [](const Vec& x) -> Vec {
    if (x[0] > 3.0) throw ChartDomainError("outside");
    return vec({x[0] - 2.5});
  };
  const LmResult r = levenberg_marquardt(f, vec({0.0}), {});
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.x[0], 2.5, 1e-10);
}

TEST(RiemannianLog, SphereGreatCircle) {
  const ManifoldPtr S = unit_sphere();
  const Vec y = sphere_point(1.0, 0.3);
  const Vec v = riemannian_log(*S, vec({0, 0}), y);
  EXPECT_NEAR(std::sqrt(v.dot(S->metric(vec({0, 0})) * v)), 1.0, 1e-8);
}

TEST(Shooting, FlatPlaneRecoversStraightLine) {
  EuclideanSpace P(2);
  const ShootingResult r = shoot_mpp(P, {{vec({0, 0}), Mat::Identity(2, 2), 0.0}, vec({1, 0})});
  ASSERT_TRUE(r.converged);
  Vec expected = Vec::Zero(6);
  expected[0] = 1.0;
  EXPECT_LE((r.xi0 - expected).norm(), 1e-10);
  EXPECT_NEAR(r.energy, 1.0, 1e-10);
  for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
    EXPECT_NEAR(r.trajectory.z[i][0], r.trajectory.t[i], 1e-12);
    EXPECT_NEAR(r.trajectory.z[i][1], 0.0, 1e-12);
  }
}

TEST(Shooting, SphereEnergyIsSquaredDistance) {
  const ManifoldPtr S = unit_sphere();
  for (double phi : {0.0, 1.0, 2.5}) {
    const Vec x = vec({0, 0});
    const ShootingResult r = shoot_mpp(*S, {{x, testutil::orthonormal_frame(*S, x), 0.0}, sphere_point(1.0, phi)});
    ASSERT_TRUE(r.converged);
    EXPECT_LE(r.residual, 1e-8);
    EXPECT_NEAR(r.energy, 1.0, 1e-4);
  }
}

TEST(Shooting, AnisotropicSphereDeviatesFromGeodesic) {
  const ManifoldPtr S = unit_sphere();
  const Vec x = sphere_point(0.5, M_PI), y = sphere_point(0.5, 0.0);
  Mat rot(2, 2);
  rot << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
  const Mat u = testutil::orthonormal_frame(*S, x) * rot * vec({1.6, 0.5}).asDiagonal();
  const ShootingResult r = shoot_mpp(*S, {{x, u, 0.0}, y});
  ASSERT_TRUE(r.converged);
  EXPECT_LE(r.residual, 1e-8);
  const Trajectory geo = riemannian_geodesic(*S, x, riemannian_log(*S, x, y), {Scheme::kRk4, 100, 1.0});
  EXPECT_GT(testutil::sup_distance(testutil::base_points(r.trajectory, 2), testutil::base_points(geo, 2)), 0.01);
}

TEST(Shooting, ResidualSmallOnAllBundledManifolds) {
  std::mt19937_64 rng(41);
  std::vector<ManifoldPtr> manifolds = testutil::bundled_surfaces();
  manifolds.push_back(std::make_shared<LandmarkManifold>(2, 2, 0.5));
  for (const ManifoldPtr& M : manifolds) {
    const int d = M->dim();
    const Vec x = testutil::random_point(*M, rng);
    const Vec y = x + testutil::random_vec(rng, d, 0.3);
    const Mat u = testutil::orthonormal_frame(*M, x) * testutil::random_frame(rng, d, d);
    ShootingOptions opts;
    opts.restarts = 3;
    const ShootingResult r = shoot_mpp(*M, {{x, u, 0.0}, y}, opts);
    EXPECT_TRUE(r.converged) << M->name();
    EXPECT_LE(r.residual, 1e-8) << M->name();
  }
}

TEST(Shooting, SphereEnergySymmetry) {
  const ManifoldPtr S = unit_sphere();
  const Vec x = sphere_point(0.4, 0.2), y = sphere_point(0.7, 2.0);
  const ShootingResult a = shoot_mpp(*S, {{x, testutil::orthonormal_frame(*S, x), 0.0}, y});
  const ShootingResult b = shoot_mpp(*S, {{y, testutil::orthonormal_frame(*S, y), 0.0}, x});
  ASSERT_TRUE(a.converged && b.converged);
  EXPECT_NEAR(a.energy, b.energy, 1e-5);
}

TEST(Shooting, DeterministicForFixedSeed) {
  const ManifoldPtr S = unit_sphere();
  const Vec x = sphere_point(0.3, 0.0), y = sphere_point(0.6, 1.5);
  const Mat u = testutil::orthonormal_frame(*S, x) * vec({1.4, 0.6}).asDiagonal();
  ShootingOptions opts;
  opts.seed = 1234;
  const ShootingResult a = shoot_mpp(*S, {{x, u, 0.0}, y}, opts);
  const ShootingResult b = shoot_mpp(*S, {{x, u, 0.0}, y}, opts);
  EXPECT_EQ(a.selected_restart, b.selected_restart);
  ASSERT_EQ(a.xi0.size(), b.xi0.size());
  for (int i = 0; i < a.xi0.size(); ++i) EXPECT_EQ(a.xi0[i], b.xi0[i]);
}

TEST(Shooting, ExhaustedBudgetReportsFlag) {
  const ManifoldPtr S = unit_sphere();
  ShootingOptions opts;
  opts.restarts = 2;
  opts.lm.max_iterations = 0;
  const Vec x = vec({0, 0});
  const ShootingResult r = shoot_mpp(*S, {{x, testutil::orthonormal_frame(*S, x), 0.0}, vec({1.5, 0})}, opts);
  EXPECT_FALSE(r.converged);
  EXPECT_GT(r.residual, 1e-8);
  EXPECT_EQ(r.restarts.size(), 2u);
}

TEST(IntegratorOrder, EulerFineAgreesWithRk4) {
  const CotangentState z = sphere_anisotropic_state();
  EXPECT_LE((endpoint(z, Scheme::kEuler, 10000) - endpoint(z, Scheme::kRk4, 1000)).norm(), 1e-3);
}

TEST(IntegratorOrder, EulerLessAccurateThanCoarseRk4) {
  const CotangentState z = sphere_anisotropic_state();
  const Vec ref = endpoint(z, Scheme::kRk4, 4000);
  EXPECT_GT((endpoint(z, Scheme::kEuler, 1000) - ref).norm(), (endpoint(z, Scheme::kRk4, 100) - ref).norm());
}

TEST(IntegratorOrder, Rk4RichardsonRatio) {
  const CotangentState z = sphere_anisotropic_state();
  const Vec ref = endpoint(z, Scheme::kRk4, 4000);
  const double e1 = (endpoint(z, Scheme::kRk4, 25) - ref).norm();
  const double e2 = (endpoint(z, Scheme::kRk4, 50) - ref).norm();
  EXPECT_GE(e1 / e2, 8.0);
  EXPECT_LE(e1 / e2, 32.0);
}
