#include <gtest/gtest.h>

#include "test_util.hpp"

using namespace mppgeo;
using testutil::vec;

TEST(Surfaces, SphereMetricAtChartOrigin) {
  Sphere S(1.0);
  EXPECT_LE((S.metric(vec({0, 0})) - 4.0 * Mat::Identity(2, 2)).norm(), 1e-14);
  const Vec q = vec({0.5, -0.7});
  const double f = 4.0 / std::pow(1.0 + q.squaredNorm(), 2);
  EXPECT_LE((S.metric(q) - f * Mat::Identity(2, 2)).norm(), 1e-14);
}

TEST(Surfaces, PlaneIsIdentity) {
  const ManifoldPtr P = make_surface({SurfaceKind::kPlane});
  EXPECT_TRUE(P->metric(vec({3, -4})).isIdentity());
  EXPECT_LE((P->embed(vec({3, -4})) - vec({3, -4, 0})).norm(), 0.0);
}

TEST(Surfaces, UnitEllipsoidEqualsSphere) {
  Ellipsoid E(1, 1, 1);
  Sphere S(1);
  std::mt19937_64 rng(21);
  for (int n = 0; n < 50; ++n) {
    const Vec x = testutil::random_vec(rng, 2, 2.0);
    EXPECT_LE((E.metric(x) - S.metric(x)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Surfaces, EmbeddingConventions) {
  Sphere S(1.0);
  EXPECT_LE((S.embed(vec({0, 0})) - vec({0, 0, 1})).norm(), 1e-15);
  Ellipsoid E(1.0, 0.8, 0.6);
  std::mt19937_64 rng(22);
  std::vector<Vec> path;
  for (int n = 0; n < 200; ++n) path.push_back(testutil::random_vec(rng, 2, 3.0));
  for (const Vec& p : embed(E, path)) {
    const double r = std::pow(p[0] / 1.0, 2) + std::pow(p[1] / 0.8, 2) + std::pow(p[2] / 0.6, 2);
    EXPECT_NEAR(r, 1.0, 1e-10);
  }
  Sphere S2(2.5);
  for (const Vec& p : embed(S2, path)) EXPECT_NEAR(p.norm(), 2.5, 1e-10);
}

TEST(Surfaces, InducedMetricMatchesJacobian) {
  Ellipsoid E(1.0, 0.8, 0.6);
  const Vec x = vec({0.4, -0.25});
  const double h = 1e-6;
  Mat DF(3, 2);
  for (int i = 0; i < 2; ++i) {
    Vec e = Vec::Zero(2);
    e[i] = h;
    DF.col(i) = (E.embed(x + e) - E.embed(x - e)) / (2 * h);
  }
  EXPECT_LE((E.metric(x) - DF.transpose() * DF).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Surfaces, InvalidParameters) {
  EXPECT_THROW(make_surface({SurfaceKind::kSphere, -1.0}), InvalidArgument);
  EXPECT_THROW(make_surface({SurfaceKind::kEllipsoid, 1.0, {1.0, 0.0, 1.0}}), InvalidArgument);
  EXPECT_THROW(parse_surface_kind("torus"), InvalidArgument);
}

TEST(Surfaces, SphereCurvatureForRadius) {
  std::mt19937_64 rng(23);
  Sphere S(0.5);
  for (int n = 0; n < 100; ++n) {
    const Vec x = testutil::random_point(S, rng);
    EXPECT_NEAR(sectional_curvature(S, x, vec({1, 0}), vec({0, 1})), 4.0, 1e-8);
  }
}
