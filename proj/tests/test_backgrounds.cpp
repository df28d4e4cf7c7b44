#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "parafreq/backgrounds.hpp"

using namespace parafreq;

TEST(Geometry, GaussianIsStatic) {
  const auto bg = FlowBackground::gaussian_soliton(1, 0.0);
  const auto g = geometry(bg, -1.0);
  EXPECT_DOUBLE_EQ(g.tau, 1.0);
  EXPECT_DOUBLE_EQ(g.scale, 1.0);
  EXPECT_DOUBLE_EQ(g.scalar_curvature, 0.0);
}

TEST(Geometry, SphereShrinksLinearly) {
  const auto bg = FlowBackground::shrinking_sphere(4.0, 1.0);
  const auto g = geometry(bg, 0.0);
  EXPECT_DOUBLE_EQ(g.tau, 1.0);
  EXPECT_DOUBLE_EQ(g.scale, 4.0);
  EXPECT_DOUBLE_EQ(g.scalar_curvature, 0.5);
  // integrate c' = -R c = -2 from t = 0 with forward Euler
  double c = 4.0;
  for (int i = 0; i < 999; ++i) c -= (2.0 / c) * c * 1e-3;
  EXPECT_NEAR(geometry(bg, 0.999).scale, c, 1e-12);
  EXPECT_NEAR(geometry(bg, -1.0).scale, 6.0, 1e-12);
  // R = 2/c matches the curvature of a round sphere of radius sqrt(c)
  for (double t : {-2.0, -0.5, 0.5}) {
    const auto s = geometry(bg, t);
    const double r = std::sqrt(s.scale);
    EXPECT_NEAR(s.scalar_curvature, 2.0 / (r * r), 1e-14);
  }
}

TEST(Geometry, CircleIsFlat) {
  const auto bg = FlowBackground::flat_circle(2.0 * M_PI, 0.0);
  const auto g = geometry(bg, -0.25);
  EXPECT_DOUBLE_EQ(g.tau, 0.25);
  EXPECT_DOUBLE_EQ(g.scale, 1.0);
  EXPECT_DOUBLE_EQ(g.scalar_curvature, 0.0);
}

TEST(Geometry, TimeOutOfWindow) {
  const auto bg = FlowBackground::gaussian_soliton(2, 0.0);
  try {
    geometry(bg, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TimeOutOfWindow);
  }
  EXPECT_THROW(geometry(bg, 0.5), Error);
  const auto sph = FlowBackground::shrinking_sphere(4.0, 1.0);
  EXPECT_THROW(geometry(sph, 1.0), Error);
  EXPECT_NO_THROW(geometry(sph, 0.99));
}

TEST(Background, SphereMustExistUntilT1) {
  EXPECT_THROW(FlowBackground::shrinking_sphere(4.0, 2.0), Error);
  EXPECT_THROW(FlowBackground::shrinking_sphere(4.0, 3.0), Error);
  EXPECT_NO_THROW(FlowBackground::shrinking_sphere(4.0, 1.9));
}

TEST(Background, Accessors) {
  const auto bg = FlowBackground::gaussian_soliton(3, 0.5, Point{1.0, 2.0, 3.0});
  EXPECT_EQ(bg.dim(), 3);
  EXPECT_EQ(bg.kind(), BackgroundKind::GaussianSoliton);
  EXPECT_DOUBLE_EQ(bg.t1(), 0.5);
  EXPECT_DOUBLE_EQ(bg.center()[2], 3.0);
  EXPECT_EQ(to_string(BackgroundKind::FlatCircle), "circle");
  EXPECT_EQ(FlowBackground::flat_circle(3.0, 0.0).dim(), 1);
  EXPECT_EQ(FlowBackground::shrinking_sphere(4.0, 1.0).dim(), 2);
}

TEST(LaplaceEigenvalue, CircleFourierModes) {
  const auto bg = FlowBackground::flat_circle(2.0 * M_PI, 0.0);
  EXPECT_DOUBLE_EQ(laplace_eigenvalue(bg, 3, -1.0), -9.0);
  EXPECT_DOUBLE_EQ(laplace_eigenvalue(bg, 3, -0.1), -9.0);
  EXPECT_DOUBLE_EQ(laplace_eigenvalue(bg, 0, -1.0), 0.0);
  const auto bg2 = FlowBackground::flat_circle(1.0, 0.0);
  EXPECT_NEAR(laplace_eigenvalue(bg2, 1, -1.0), -4.0 * M_PI * M_PI, 1e-12);
}

TEST(LaplaceEigenvalue, SphereHarmonics) {
  const auto bg = FlowBackground::shrinking_sphere(4.0, 1.0);
  EXPECT_DOUBLE_EQ(laplace_eigenvalue(bg, 2, 0.0), -1.5);
  EXPECT_DOUBLE_EQ(laplace_eigenvalue(bg, 0, 0.0), 0.0);
  // finite-difference Laplacian of P_2(cos th) on a theta grid
  auto p2 = [](double th) { const double m = std::cos(th); return 0.5 * (3 * m * m - 1); };
  for (double th : {0.3, 1.0, 2.0, 2.8}) {
    const double fd = oracle::zonal_laplacian_fd(p2, 4.0, th);
    EXPECT_NEAR(fd, laplace_eigenvalue(bg, 2, 0.0) * p2(th), 1e-6);
  }
}

TEST(LaplaceEigenvalue, GaussianUnsupported) {
  const auto bg = FlowBackground::gaussian_soliton(1, 0.0);
  try {
    laplace_eigenvalue(bg, 1, -1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnsupportedBackground);
  }
}
