#pragma once

#include <optional>

#include <Eigen/Core>

namespace edgecal {

using Vector6 = Eigen::Matrix<double, 6, 1>;

// LiDAR-to-camera extrinsics. Rotation is R = Rz(rz) * Ry(ry) * Rx(rx), so a
// LiDAR point p maps to R * p + t in the camera frame. Published angle triples
// from other tools are only comparable under this same composition order.
struct ExtrinsicParams {
  double rx = 0.0, ry = 0.0, rz = 0.0;  // radians
  double tx = 0.0, ty = 0.0, tz = 0.0;  // meters

  Vector6 to_vector() const;
  // Angles are wrapped into (-pi, pi].
  static ExtrinsicParams from_vector(const Vector6& v);

  Eigen::Matrix3d rotation() const;
  Eigen::Vector3d translation() const { return {tx, ty, tz}; }

  bool operator==(const ExtrinsicParams&) const = default;
};

// 3x4 projection matrix plus image size in pixels. Pixel (0,0) has its center
// at u = (0,0).
struct CameraIntrinsics {
  Eigen::Matrix<double, 3, 4> projection = Eigen::Matrix<double, 3, 4>::Zero();
  int width = 0;
  int height = 0;

  double fx() const { return projection(0, 0); }
  double fy() const { return projection(1, 1); }
  double cx() const { return projection(0, 2); }
  double cy() const { return projection(1, 2); }

  // Throws InvalidArgument when the focal lengths are not positive or the
  // principal point is outside the image.
  void validate() const;

  static CameraIntrinsics from_pinhole(double fx, double fy, double cx, double cy, int width,
                                       int height);
};

struct Point3 {
  double x = 0.0, y = 0.0, z = 0.0;  // meters, LiDAR frame
  double reflectivity = 0.0;         // [0,1]

  Eigen::Vector3d position() const { return {x, y, z}; }
  bool operator==(const Point3&) const = default;
};

struct PanoramaCell {
  int col = 0;  // horizontal index i, increasing with azimuth
  int row = 0;  // vertical index j, 0 at the highest elevation
  bool operator==(const PanoramaCell&) const = default;
};

// Cylindrical panorama layout. The azimuth window is centered on
// `azimuth_center` and spans +-`azimuth_half_width`; the elevation window is
// [elevation_min, elevation_max]. Windows are snapped so that the center
// azimuth and elevation_max fall exactly on cell centers.
class PanoramaGeometry {
 public:
  // Angles in radians. `scale` is the dimensionless h that multiplies both
  // angular resolutions.
  static PanoramaGeometry make(double scale, double delta_h, double delta_v,
                               double azimuth_center, double azimuth_half_width,
                               double elevation_min, double elevation_max);
  static PanoramaGeometry full_circle(double scale, double delta_h, double delta_v,
                                      double elevation_min, double elevation_max);

  double scale() const { return scale_; }
  double delta_h() const { return delta_h_; }
  double delta_v() const { return delta_v_; }
  double azimuth_center() const { return azimuth_center_; }
  double azimuth_half_width() const { return half_cells_ * delta_h_ / scale_; }
  double elevation_min() const { return elevation_min_; }
  double elevation_max() const { return elevation_max_; }
  int width() const { return width_; }
  int height() const { return height_; }
  int center_col() const { return half_cells_; }
  bool full_360() const { return full_360_; }

 private:
  double scale_ = 1.0;
  double delta_h_ = 0.0;
  double delta_v_ = 0.0;
  double azimuth_center_ = 0.0;
  double elevation_min_ = 0.0;
  double elevation_max_ = 0.0;
  int half_cells_ = 0;
  int width_ = 0;
  int height_ = 0;
  bool full_360_ = false;
};

struct ImageProjection {
  Eigen::Vector2d pixel = Eigen::Vector2d::Zero();
  double depth = 0.0;
  bool in_front = false;  // depth > 0
  bool in_image = false;  // in_front and pixel inside [0,N) x [0,M)
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

Eigen::Matrix3d rotation_from_angles(double rx, double ry, double rz);

// Inverse of rotation_from_angles for a proper rotation matrix. At gimbal lock
// (|ry| = pi/2) rz is set to 0 and the remaining freedom goes into rx.
Eigen::Vector3d angles_from_rotation(const Eigen::Matrix3d& r);

Eigen::Vector3d transform_point(const ExtrinsicParams& theta, const Eigen::Vector3d& p);
Eigen::Vector3d transform_point(const ExtrinsicParams& theta, const Point3& p);

ImageProjection project_to_image(const CameraIntrinsics& k, const Eigen::Vector3d& p_cam);

// Inverse of project_to_image for a known camera-frame depth.
Eigen::Vector3d unproject(const CameraIntrinsics& k, const Eigen::Vector2d& pixel, double depth);

// Returns nullopt when the point falls outside the panorama window. Throws
// InvalidArgument for the origin or non-finite coordinates.
std::optional<PanoramaCell> cylindrical_project(const Point3& p, const PanoramaGeometry& geom);
std::optional<PanoramaCell> cylindrical_project(const Eigen::Vector3d& p,
                                                const PanoramaGeometry& geom);

}  // namespace edgecal
