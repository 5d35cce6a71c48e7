#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edgecal/geometry.hpp"
#include "edgecal/grid.hpp"

namespace edgecal::synth {

struct Material {
  double albedo = 0.5;        // camera gray level
  double reflectivity = 0.2;  // LiDAR return intensity
};

// Axis-aligned in its own frame, rotated by `yaw` about the vertical axis.
// Face order: +x, -x, +y, -y, +z (top), -z (bottom), in the box frame.
struct BoxObject {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Ones();
  double yaw = 0.0;  // radians
  std::array<Material, 6> faces{};
};

// Vertical cylinder standing on `base`.
struct CylinderObject {
  Eigen::Vector3d base = Eigen::Vector3d::Zero();
  double radius = 0.2;
  double height = 2.0;
  Material side{};
  Material top{};
};

// Darkens ground pixels inside an axis-aligned rectangle of the LiDAR frame.
// The LiDAR does not see shadows.
struct ShadowRegion {
  double x_min = 0.0, x_max = 0.0, y_min = 0.0, y_max = 0.0;
  double factor = 0.4;
};

struct LidarModel {
  int rings = 32;
  double elevation_min_deg = -25.0;
  double elevation_max_deg = 3.0;
  double azimuth_step_deg = 0.2;
  double max_range = 80.0;
  double noise_sigma = 0.01;  // meters, along the ray

  // Ring elevations in radians, evenly spaced, lowest first.
  std::vector<double> ring_elevations() const;
};

struct SceneSpec {
  double ground_z = -1.73;
  Material ground{0.35, 0.12};
  double sky_albedo = 0.9;
  std::vector<BoxObject> boxes;
  std::vector<CylinderObject> cylinders;
  std::vector<ShadowRegion> shadows;
  LidarModel lidar;
  CameraIntrinsics camera = CameraIntrinsics::from_pinhole(721.5377, 721.5377, 609.5593,
                                                           172.854, 1242, 375);
  int supersample = 2;  // camera rays per pixel along each axis
  ExtrinsicParams truth{1.598, -0.262, -0.021, 0.02, -0.08, -0.27};
  std::uint64_t seed = 0;

  // Throws InvalidArgument when the scene has no object, an object lies beyond
  // the LiDAR range, or parameters are out of their domains.
  void validate() const;
};

struct Hit {
  double distance = 0.0;
  Material material;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  bool ground = false;
};

// Nearest intersection along origin + s * dir (dir need not be unit; the
// returned distance is in units of |dir|).
std::optional<Hit> cast_ray(const SceneSpec& scene, const Eigen::Vector3d& origin,
                            const Eigen::Vector3d& dir, bool include_ground = true);

std::vector<Point3> render_lidar(const SceneSpec& scene);
GrayImage render_camera(const SceneSpec& scene);

// Uniform noise in [-m_i, +m_i] per component.
ExtrinsicParams perturb(const ExtrinsicParams& theta, const Vector6& magnitudes,
                        std::uint64_t seed);

enum class LayoutStyle { kUrban, kCluttered, kSparse };

// Replaces objects and shadows with a random street layout inside the camera
// view of `base.truth`; sensors and truth are kept. Cluttered packs more
// objects into the near field; sparse keeps few objects and adds shadows.
SceneSpec randomize_layout(const SceneSpec& base, std::uint64_t layout_seed,
                           LayoutStyle style = LayoutStyle::kUrban);

// Scene files use the config syntax: scalar keys plus repeatable
//   box = cx cy cz  sx sy sz  yaw_deg  albedo reflectivity
//   box = cx cy cz  sx sy sz  yaw_deg  albedo x6  reflectivity x6
//   cylinder = bx by bz  radius height  side_albedo side_refl top_albedo top_refl
//   shadow = x_min x_max y_min y_max factor
SceneSpec parse_scene(const std::string& text);
SceneSpec load_scene(const std::filesystem::path& path);
std::string scene_to_text(const SceneSpec& scene);

}  // namespace edgecal::synth
