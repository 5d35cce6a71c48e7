#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Geometry>
#include <gtest/gtest.h>

#include "edgecal/errors.hpp"
#include "edgecal/synth.hpp"

namespace edgecal::synth {
namespace {

constexpr double kDeg = M_PI / 180.0;

BoxObject box(Eigen::Vector3d center, Eigen::Vector3d size, double yaw, double albedo, double refl) {
  BoxObject b;
  b.center = center;
  b.size = size;
  b.yaw = yaw;
  for (Material& m : b.faces) m = {albedo, refl};
  return b;
}

// Horizontal unit vector along the camera's optical axis, in the LiDAR frame.
Eigen::Vector3d forward(const SceneSpec& s) {
  Eigen::Vector3d f = s.truth.rotation().row(2).transpose();
  f.z() = 0.0;
  return f.normalized();
}

SceneSpec small_camera_scene() {
  SceneSpec s;
  s.camera = CameraIntrinsics::from_pinhole(200.0, 200.0, 159.5, 59.5, 320, 120);
  s.supersample = 1;
  return s;
}

std::array<Eigen::Vector3d, 8> corners(const BoxObject& b) {
  std::array<Eigen::Vector3d, 8> out;
  const Eigen::Matrix3d rot = Eigen::AngleAxisd(b.yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  for (int i = 0; i < 8; ++i) {
    const Eigen::Vector3d local(((i & 1) ? 0.5 : -0.5) * b.size.x(), ((i & 2) ? 0.5 : -0.5) * b.size.y(),
                                ((i & 4) ? 0.5 : -0.5) * b.size.z());
    out[static_cast<std::size_t>(i)] = b.center + rot * local;
  }
  return out;
}

// Signed distance from p to a counter-clockwise convex polygon (negative inside).
double polygon_distance(const std::vector<Eigen::Vector2d>& hull, const Eigen::Vector2d& p) {
  double worst = -1e300;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Eigen::Vector2d a = hull[i], b = hull[(i + 1) % hull.size()];
    const Eigen::Vector2d e = (b - a).normalized();
    const Eigen::Vector2d outward(e.y(), -e.x());
    worst = std::max(worst, outward.dot(p - a));
  }
  return worst;
}

std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return (a - o).x() * (b - o).y() - (a - o).y() * (b - o).x();
  };
  std::vector<Eigen::Vector2d> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i - 1]) <= 0) --k;
    hull[k++] = pts[i - 1];
  }
  hull.resize(k - 1);
  return hull;
}

// ------------------------------------------------------------ lidar

TEST(RenderLidar, GroundRingIsACircle) {
  SceneSpec s;
  s.lidar.rings = 1;
  s.lidar.elevation_min_deg = s.lidar.elevation_max_deg = -10.0;
  s.lidar.noise_sigma = 0.0;
  s.boxes.push_back(box({0.0, 0.0, 20.0}, {1, 1, 1}, 0.0, 0.5, 0.5));  // overhead, never hit
  const std::vector<Point3> cloud = render_lidar(s);
  EXPECT_EQ(cloud.size(), 1800u);
  const double expected = -s.ground_z / std::sin(10.0 * kDeg);
  for (const Point3& p : cloud) {
    EXPECT_NEAR(p.position().norm(), expected, 1e-9);
    EXPECT_NEAR(p.z, s.ground_z, 1e-9);
    EXPECT_EQ(p.reflectivity, s.ground.reflectivity);
  }
}

TEST(RenderLidar, BoxShadowsWall) {
  SceneSpec s;
  s.lidar.noise_sigma = 0.0;
  s.boxes.push_back(box({30.0, 0.0, 3.0}, {0.5, 40.0, 12.0}, 0.0, 0.5, 0.9));  // wall
  s.boxes.push_back(box({10.0, 0.0, -0.73}, {1.0, 2.0, 2.0}, 0.0, 0.5, 0.3));  // block
  const std::vector<Point3> cloud = render_lidar(s);
  // Block spans |az| <= atan(1 / 9.5); nothing behind it reaches the wall.
  const double half = std::atan2(1.0, 9.5);
  int wall = 0, hidden_wall = 0;
  for (const Point3& p : cloud) {
    if (p.reflectivity != 0.9) continue;
    ++wall;
    const double az = std::atan2(p.y, p.x);
    const double el = std::atan2(p.z, std::hypot(p.x, p.y));
    if (std::abs(az) < half - 0.01 && el < std::atan2(0.27, 9.5) - 0.01) ++hidden_wall;
  }
  EXPECT_GT(wall, 1000);
  EXPECT_EQ(hidden_wall, 0);
}

TEST(RenderLidar, PointsOnSurfacesWithinFourSigma) {
  SceneSpec base;
  base.seed = 3;
  const SceneSpec s = randomize_layout(base, 5);
  const std::vector<Point3> cloud = render_lidar(s);
  ASSERT_GT(cloud.size(), 10000u);
  for (std::size_t i = 0; i < cloud.size(); i += 7) {
    const Eigen::Vector3d dir = cloud[i].position().normalized();
    const std::optional<Hit> hit = cast_ray(s, Eigen::Vector3d::Zero(), dir);
    ASSERT_TRUE(hit);
    EXPECT_LE(std::abs(hit->distance - cloud[i].position().norm()), 4.0 * s.lidar.noise_sigma + 1e-9);
  }
}

TEST(RenderLidar, Deterministic) {
  SceneSpec base;
  base.seed = 8;
  const SceneSpec s = randomize_layout(base, 2);
  EXPECT_EQ(render_lidar(s), render_lidar(s));
  SceneSpec other = s;
  other.seed = 9;
  EXPECT_NE(render_lidar(s), render_lidar(other));
}

TEST(RenderLidar, RingElevations) {
  LidarModel m;
  const auto rings = m.ring_elevations();
  ASSERT_EQ(rings.size(), 32u);
  EXPECT_NEAR(rings.front(), -25.0 * kDeg, 1e-15);
  EXPECT_NEAR(rings.back(), 3.0 * kDeg, 1e-15);
}

// ------------------------------------------------------------ camera

TEST(RenderCamera, BoxSilhouetteMatchesProjectedCorners) {
  SceneSpec s = small_camera_scene();
  const Eigen::Vector3d f = forward(s);
  s.boxes.push_back(box(Eigen::Vector3d(0, 0, -0.5) + 9.0 * f, {1.5, 2.0, 1.6}, 0.3, 0.123, 0.4));
  const GrayImage img = render_camera(s);

  std::vector<Eigen::Vector2d> projected;
  for (const Eigen::Vector3d& c : corners(s.boxes[0])) {
    const ImageProjection p = project_to_image(s.camera, transform_point(s.truth, Point3{c.x(), c.y(), c.z(), 0.0}));
    ASSERT_TRUE(p.in_front);
    projected.push_back(p.pixel);
  }
  const std::vector<Eigen::Vector2d> hull = convex_hull(projected);
  int inside = 0;
  for (int v = 0; v < img.rows(); ++v)
    for (int u = 0; u < img.cols(); ++u) {
      const double d = polygon_distance(hull, {u, v});
      const bool is_box = img(v, u) == 0.123;
      if (is_box) EXPECT_LE(d, 1.0) << u << "," << v;
      if (d < -1.0) EXPECT_TRUE(is_box) << u << "," << v;
      inside += is_box;
    }
  EXPECT_GT(inside, 500);
}

TEST(RenderCamera, SkyAboveHorizon) {
  SceneSpec s = small_camera_scene();
  s.boxes.push_back(box(-10.0 * forward(s), {1, 1, 1}, 0.0, 0.5, 0.5));  // behind the camera
  const GrayImage img = render_camera(s);
  // The camera sits 1.7 m above the ground and pitches slightly; the top row sees sky.
  for (int u = 0; u < img.cols(); ++u) EXPECT_EQ(img(0, u), s.sky_albedo);
  bool any_ground = false;
  for (int u = 0; u < img.cols(); ++u) any_ground = any_ground || img(img.rows() - 1, u) == s.ground.albedo;
  EXPECT_TRUE(any_ground);
}

TEST(RenderCamera, ShadowDarkensGround) {
  SceneSpec s = small_camera_scene();
  s.boxes.push_back(box(-10.0 * forward(s), {1, 1, 1}, 0.0, 0.5, 0.5));
  const GrayImage plain = render_camera(s);
  s.shadows.push_back({-1e6, 1e6, -1e6, 1e6, 0.4});
  const GrayImage shaded = render_camera(s);
  int darkened = 0;
  for (std::size_t i = 0; i < plain.size(); ++i) {
    if (plain.values()[i] == s.ground.albedo) {
      EXPECT_DOUBLE_EQ(shaded.values()[i], 0.4 * s.ground.albedo);
      ++darkened;
    } else {
      EXPECT_EQ(shaded.values()[i], plain.values()[i]);
    }
  }
  EXPECT_GT(darkened, 0);
}

TEST(RenderCamera, LidarPointsLandInSilhouette) {
  SceneSpec s = small_camera_scene();
  s.lidar.noise_sigma = 0.0;
  const Eigen::Vector3d f = forward(s);
  const Eigen::Vector3d side(-f.y(), f.x(), 0.0);
  s.boxes.push_back(box(Eigen::Vector3d(0, 0, -0.7) + 8.0 * f + 1.0 * side, {1.2, 1.8, 2.0}, 0.2, 0.123, 0.77));
  s.cylinders.push_back({Eigen::Vector3d(0, 0, s.ground_z) + 11.0 * f - 2.0 * side, 0.2, 4.0, {0.222, 0.66}, {0.222, 0.66}});
  const GrayImage img = render_camera(s);
  const std::vector<Point3> cloud = render_lidar(s);
  int total = 0, good = 0;
  for (const Point3& p : cloud) {
    double albedo;
    if (p.reflectivity == 0.77) albedo = 0.123;
    else if (p.reflectivity == 0.66) albedo = 0.222;
    else continue;
    const ImageProjection proj = project_to_image(s.camera, transform_point(s.truth, p));
    if (!proj.in_image) continue;
    ++total;
    const int u = static_cast<int>(std::lround(proj.pixel.x())), v = static_cast<int>(std::lround(proj.pixel.y()));
    bool hit = false;
    for (int dv = -2; dv <= 2; ++dv)
      for (int du = -2; du <= 2; ++du)
        hit = hit || (img.contains(v + dv, u + du) && img(v + dv, u + du) == albedo);
    good += hit;
  }
  ASSERT_GT(total, 100);
  EXPECT_GE(good, 0.99 * total);
}

// ------------------------------------------------------------ perturb

TEST(Perturb, ZeroMagnitudeIsIdentity) {
  const ExtrinsicParams t{0.1, 0.2, 0.3, 0.4, 0.5, 0.6};
  EXPECT_EQ(perturb(t, Vector6::Zero(), 5), t);
}

TEST(Perturb, BoundedAndReproducible) {
  const ExtrinsicParams t{1.598, -0.262, -0.021, 0.02, -0.08, -0.27};
  const Vector6 mag = (Vector6() << 0.3, 0.3, 0.3, 0.1, 0.1, 0.1).finished();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const ExtrinsicParams p = perturb(t, mag, seed);
    EXPECT_EQ(p, perturb(t, mag, seed));
    const Vector6 d = p.to_vector() - t.to_vector();
    for (int i = 0; i < 6; ++i) EXPECT_LE(std::abs(d(i)), mag(i) + 1e-15);
  }
  EXPECT_NE(perturb(t, mag, 1), perturb(t, mag, 2));
}

// ------------------------------------------------------------ scenes

TEST(Scene, ValidateRejects) {
  SceneSpec s;
  EXPECT_THROW(s.validate(), InvalidArgument);  // no object
  s.boxes.push_back(box({200.0, 0.0, 0.0}, {1, 1, 1}, 0.0, 0.5, 0.5));
  EXPECT_THROW(s.validate(), InvalidArgument);  // beyond range
  s.boxes[0].center = {20.0, 0.0, 0.0};
  EXPECT_NO_THROW(s.validate());
  s.lidar.rings = 0;
  EXPECT_THROW(s.validate(), InvalidArgument);
}

TEST(Scene, TextRoundTrip) {
  SceneSpec base;
  base.seed = 12;
  base.lidar.rings = 64;
  base.lidar.elevation_min_deg = -24.8;
  base.lidar.elevation_max_deg = 2.0;
  for (LayoutStyle style : {LayoutStyle::kUrban, LayoutStyle::kCluttered, LayoutStyle::kSparse}) {
    const SceneSpec s = randomize_layout(base, 4, style);
    const SceneSpec back = parse_scene(scene_to_text(s));
    EXPECT_EQ(scene_to_text(back), scene_to_text(s));
    EXPECT_EQ(render_lidar(back), render_lidar(s));
  }
}

TEST(Scene, UnknownKeyRejected) { EXPECT_THROW(parse_scene("grund.z = 1\n"), ParseError); }

TEST(Scene, PresetsLoad) {
  for (const char* name : {"urban", "cluttered", "sparse_shadow"}) {
    const SceneSpec s = load_scene(std::filesystem::path(EDGECAL_SOURCE_DIR) / "presets" / (std::string(name) + ".scene"));
    EXPECT_NO_THROW(s.validate()) << name;
    EXPECT_EQ(s.lidar.rings, 64) << name;
    EXPECT_EQ(scene_to_text(parse_scene(scene_to_text(s))), scene_to_text(s)) << name;
  }
}

TEST(Scene, LayoutsAreValidAndDistinct) {
  SceneSpec base;
  for (std::uint64_t seed = 0; seed < 20; ++seed)
    for (LayoutStyle style : {LayoutStyle::kUrban, LayoutStyle::kCluttered, LayoutStyle::kSparse}) {
      const SceneSpec s = randomize_layout(base, seed, style);
      EXPECT_NO_THROW(s.validate());
      EXPECT_EQ(s.truth, base.truth);
      if (style == LayoutStyle::kSparse) EXPECT_FALSE(s.shadows.empty());
    }
  EXPECT_NE(scene_to_text(randomize_layout(base, 1)), scene_to_text(randomize_layout(base, 2)));
  EXPECT_EQ(scene_to_text(randomize_layout(base, 1)), scene_to_text(randomize_layout(base, 1)));
}

}  // namespace
}  // namespace edgecal::synth
