#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "edgecal/errors.hpp"
#include "edgecal/geometry.hpp"

namespace edgecal {
namespace {

constexpr double kPi = std::numbers::pi;

// Independent reference: elementary rotations multiplied out by hand.
Eigen::Matrix3d reference_rotation(double rx, double ry, double rz) {
  Eigen::Matrix3d x, y, z;
  x << 1, 0, 0, 0, std::cos(rx), -std::sin(rx), 0, std::sin(rx), std::cos(rx);
  y << std::cos(ry), 0, std::sin(ry), 0, 1, 0, -std::sin(ry), 0, std::cos(ry);
  z << std::cos(rz), -std::sin(rz), 0, std::sin(rz), std::cos(rz), 0, 0, 0, 1;
  return z * y * x;
}

TEST(Rotation, IdentityAtZero) {
  EXPECT_TRUE(rotation_from_angles(0, 0, 0).isApprox(Eigen::Matrix3d::Identity(), 1e-15));
}

TEST(Rotation, QuarterTurnAboutZ) {
  Eigen::Matrix3d expected;
  expected << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_LT((rotation_from_angles(0, 0, kPi / 2) - expected).norm(), 1e-15);
}

TEST(Rotation, TableTwoAnglesGiveProperRotation) {
  const Eigen::Matrix3d r = rotation_from_angles(0.470, -1.554, 1.100);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  EXPECT_LT((r.transpose() * r - Eigen::Matrix3d::Identity()).norm(), 1e-12);
}

TEST(Rotation, ComposesZYX) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  for (int i = 0; i < 100; ++i) {
    const double rx = a(rng), ry = a(rng), rz = a(rng);
    EXPECT_LT((rotation_from_angles(rx, ry, rz) - reference_rotation(rx, ry, rz)).norm(), 1e-14);
  }
}

TEST(Rotation, RejectsNonFinite) {
  EXPECT_THROW(rotation_from_angles(NAN, 0, 0), InvalidArgument);
  EXPECT_THROW(rotation_from_angles(0, INFINITY, 0), InvalidArgument);
}

TEST(Rotation, OrthonormalOnRandomAngles) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix3d r = rotation_from_angles(a(rng), a(rng), a(rng));
    EXPECT_LT((r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-10);
  }
}

TEST(Rotation, AnglesRoundTripAwayFromGimbalLock) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> a(-3.0, 3.0), b(-1.5, 1.5);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d in(a(rng), b(rng), a(rng));
    const Eigen::Vector3d out = angles_from_rotation(rotation_from_angles(in.x(), in.y(), in.z()));
    EXPECT_LT((out - in).norm(), 1e-9);
  }
}

TEST(Extrinsics, FromVectorWrapsAngles) {
  Vector6 v;
  v << 3 * kPi / 2, -3 * kPi / 2, kPi, 1, 2, 3;
  const ExtrinsicParams t = ExtrinsicParams::from_vector(v);
  EXPECT_NEAR(t.rx, -kPi / 2, 1e-12);
  EXPECT_NEAR(t.ry, kPi / 2, 1e-12);
  EXPECT_NEAR(t.rz, kPi, 1e-12);
  EXPECT_EQ(t.tz, 3.0);
}

TEST(Transform, Examples) {
  EXPECT_TRUE(transform_point(ExtrinsicParams{}, Point3{1, 2, 3, 0}).isApprox(Eigen::Vector3d(1, 2, 3)));
  EXPECT_TRUE(transform_point(ExtrinsicParams{0, 0, 0, 1, 0, 0}, Point3{0, 0, 0, 0})
                  .isApprox(Eigen::Vector3d(1, 0, 0)));
  const Eigen::Vector3d q = transform_point(ExtrinsicParams{0, 0, kPi / 2, 0, 0, 0}, Point3{1, 0, 0, 0});
  EXPECT_LT((q - Eigen::Vector3d(0, 1, 0)).norm(), 1e-15);
}

TEST(Transform, PreservesDistances) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> a(-kPi, kPi), p(-50.0, 50.0);
  for (int i = 0; i < 500; ++i) {
    const ExtrinsicParams t{a(rng), a(rng), a(rng), p(rng), p(rng), p(rng)};
    const Eigen::Vector3d x(p(rng), p(rng), p(rng)), y(p(rng), p(rng), p(rng));
    EXPECT_NEAR((transform_point(t, x) - transform_point(t, y)).norm(), (x - y).norm(), 1e-9);
  }
}

CameraIntrinsics unit_camera() {
  CameraIntrinsics k;
  k.projection << 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0;
  k.width = 10;
  k.height = 10;
  return k;
}

TEST(Projection, Examples) {
  const ImageProjection axis = project_to_image(unit_camera(), {0, 0, 5});
  EXPECT_EQ(axis.pixel, Eigen::Vector2d(0, 0));
  EXPECT_EQ(axis.depth, 5.0);
  EXPECT_TRUE(axis.in_image);

  const CameraIntrinsics k = CameraIntrinsics::from_pinhole(100, 100, 50, 50, 100, 100);
  const ImageProjection p = project_to_image(k, {1, 0, 10});
  EXPECT_LT((p.pixel - Eigen::Vector2d(60, 50)).norm(), 1e-12);

  const ImageProjection behind = project_to_image(k, {0, 0, -1});
  EXPECT_FALSE(behind.in_front);
  EXPECT_FALSE(behind.in_image);
}

TEST(Projection, OutsideImageIsFlagged) {
  const CameraIntrinsics k = CameraIntrinsics::from_pinhole(100, 100, 50, 50, 100, 100);
  EXPECT_FALSE(project_to_image(k, {10, 0, 10}).in_image);
  EXPECT_TRUE(project_to_image(k, {10, 0, 10}).in_front);
}

TEST(Projection, UnprojectInvertsProject) {
  CameraIntrinsics k = CameraIntrinsics::from_pinhole(721.5, 721.5, 609.6, 172.9, 1242, 375);
  k.projection(0, 3) = 44.9;  // KITTI P2 has a baseline term
  k.projection(1, 3) = 0.2;
  k.projection(2, 3) = 0.003;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> xy(-20, 20), z(0.5, 60);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d p(xy(rng), xy(rng), z(rng));
    const ImageProjection pr = project_to_image(k, p);
    ASSERT_TRUE(pr.in_front);
    EXPECT_LT((unproject(k, pr.pixel, pr.depth) - p).norm(), 1e-9);
  }
}

TEST(Intrinsics, ValidateRejectsBadValues) {
  EXPECT_THROW(CameraIntrinsics::from_pinhole(0, 100, 50, 50, 100, 100).validate(), InvalidArgument);
  EXPECT_THROW(CameraIntrinsics::from_pinhole(100, 100, 150, 50, 100, 100).validate(),
               InvalidArgument);
  EXPECT_NO_THROW(CameraIntrinsics::from_pinhole(100, 100, 50, 50, 100, 100).validate());
}

PanoramaGeometry test_geometry() {
  return PanoramaGeometry::make(1.0, 0.5 * kPi / 180, 1.0 * kPi / 180, 0.0, 60 * kPi / 180,
                                -50 * kPi / 180, 50 * kPi / 180);
}

TEST(Cylindrical, AxisPointLandsOnCenter) {
  const PanoramaGeometry g = test_geometry();
  const auto cell = cylindrical_project(Eigen::Vector3d(1, 0, 0), g);
  ASSERT_TRUE(cell);
  EXPECT_EQ(cell->col, g.center_col());
  EXPECT_EQ(cell->row, 50);  // el_max / delta_v
}

TEST(Cylindrical, FortyFiveDegrees) {
  const PanoramaGeometry g = test_geometry();
  const auto az = cylindrical_project(Eigen::Vector3d(1, 1, 0), g);
  ASSERT_TRUE(az);
  EXPECT_EQ(az->col, g.center_col() + 90);
  const auto el = cylindrical_project(Eigen::Vector3d(1, 0, 1), g);
  ASSERT_TRUE(el);
  EXPECT_EQ(el->row, 50 - 45);
}

TEST(Cylindrical, OutsideWindowAndOrigin) {
  const PanoramaGeometry g = test_geometry();
  EXPECT_FALSE(cylindrical_project(Eigen::Vector3d(-1, 0, 0), g));
  EXPECT_FALSE(cylindrical_project(Eigen::Vector3d(1, 0, 5), g));
  EXPECT_THROW(cylindrical_project(Eigen::Vector3d(0, 0, 0), g), InvalidArgument);
}

TEST(Cylindrical, FullCircleCoversEveryAzimuth) {
  const PanoramaGeometry g = PanoramaGeometry::full_circle(1.0, kPi / 180, kPi / 180, -0.5, 0.5);
  for (int k = 0; k < 3600; ++k) {
    const double a = -kPi + 2 * kPi * k / 3600.0;
    const auto cell = cylindrical_project(Eigen::Vector3d(std::cos(a), std::sin(a), 0), g);
    ASSERT_TRUE(cell);
    EXPECT_GE(cell->col, 0);
    EXPECT_LT(cell->col, g.width());
  }
}

TEST(Cylindrical, ColumnMonotoneInAzimuth) {
  const PanoramaGeometry g = test_geometry();
  const int samples = 10 * g.width();
  const double half = g.azimuth_half_width();
  int previous = -1;
  for (int k = 0; k < samples; ++k) {
    const double a = -half + 2 * half * k / (samples - 1);
    const auto cell = cylindrical_project(Eigen::Vector3d(std::cos(a), std::sin(a), 0), g);
    ASSERT_TRUE(cell) << "azimuth " << a;
    EXPECT_GE(cell->col, previous);
    previous = cell->col;
  }
}

TEST(Cylindrical, DeclaredRangeMapsInsideGrid) {
  const PanoramaGeometry g = test_geometry();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> az(-g.azimuth_half_width(), g.azimuth_half_width());
  std::uniform_real_distribution<double> el(g.elevation_min(), g.elevation_max());
  for (int i = 0; i < 2000; ++i) {
    const double a = az(rng), e = el(rng);
    const Eigen::Vector3d p(std::cos(e) * std::cos(a), std::cos(e) * std::sin(a), std::sin(e));
    const auto cell = cylindrical_project(p, g);
    ASSERT_TRUE(cell);
    EXPECT_LT(cell->row, g.height());
  }
}

TEST(Panorama, RejectsBadGeometry) {
  EXPECT_THROW(PanoramaGeometry::make(1.0, 0.0, 0.01, 0, 0.5, -0.1, 0.1), InvalidArgument);
  EXPECT_THROW(PanoramaGeometry::make(1.0, 0.01, 0.01, 0, 0.5, 0.1, -0.1), InvalidArgument);
  const PanoramaGeometry g = PanoramaGeometry::make(2.0, 0.01, 0.01, 0, 0.5, -0.1, 0.1);
  EXPECT_GE(g.width(), 2);
  EXPECT_GE(g.height(), 2);
}

}  // namespace
}  // namespace edgecal
