#include "edgecal/geometry.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "edgecal/errors.hpp"

namespace edgecal {

namespace {

constexpr double kPi = std::numbers::pi;

bool all_finite(double a, double b, double c) {
  return std::isfinite(a) && std::isfinite(b) && std::isfinite(c);
}

}  // namespace

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

Vector6 ExtrinsicParams::to_vector() const {
  Vector6 v;
  v << rx, ry, rz, tx, ty, tz;
  return v;
}

ExtrinsicParams ExtrinsicParams::from_vector(const Vector6& v) {
  return {wrap_angle(v[0]), wrap_angle(v[1]), wrap_angle(v[2]), v[3], v[4], v[5]};
}

Eigen::Matrix3d ExtrinsicParams::rotation() const { return rotation_from_angles(rx, ry, rz); }

Eigen::Matrix3d rotation_from_angles(double rx, double ry, double rz) {
  if (!all_finite(rx, ry, rz)) throw InvalidArgument("rotation_from_angles: non-finite angle");
  const double cx = std::cos(rx), sx = std::sin(rx);
  const double cy = std::cos(ry), sy = std::sin(ry);
  const double cz = std::cos(rz), sz = std::sin(rz);
  Eigen::Matrix3d r;
  r << cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,  //
      sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,   //
      -sy, cy * sx, cy * cx;
  return r;
}

Eigen::Vector3d angles_from_rotation(const Eigen::Matrix3d& r) {
  const double sy = std::clamp(-r(2, 0), -1.0, 1.0);
  const double ry = std::asin(sy);
  const double cy = std::hypot(r(0, 0), r(1, 0));
  if (cy < 1e-12) {
    // R = Ry(+-pi/2) * Rx(rx) with rz folded away.
    return {std::atan2(-r(1, 2), r(1, 1)), ry, 0.0};
  }
  return {std::atan2(r(2, 1), r(2, 2)), ry, std::atan2(r(1, 0), r(0, 0))};
}

void CameraIntrinsics::validate() const {
  if (!projection.allFinite()) throw InvalidArgument("camera intrinsics: non-finite entries");
  if (!(fx() > 0.0) || !(fy() > 0.0))
    throw InvalidArgument("camera intrinsics: focal entries must be positive");
  if (width < 2 || height < 2) throw InvalidArgument("camera intrinsics: image too small");
  if (!(cx() >= 0.0 && cx() < width && cy() >= 0.0 && cy() < height))
    throw InvalidArgument("camera intrinsics: principal point outside the image");
}

CameraIntrinsics CameraIntrinsics::from_pinhole(double fx, double fy, double cx, double cy,
                                                int width, int height) {
  CameraIntrinsics k;
  k.projection << fx, 0, cx, 0,  //
      0, fy, cy, 0,              //
      0, 0, 1, 0;
  k.width = width;
  k.height = height;
  k.validate();
  return k;
}

Eigen::Vector3d transform_point(const ExtrinsicParams& theta, const Eigen::Vector3d& p) {
  if (!p.allFinite()) throw InvalidArgument("transform_point: non-finite point");
  return theta.rotation() * p + theta.translation();
}

Eigen::Vector3d transform_point(const ExtrinsicParams& theta, const Point3& p) {
  return transform_point(theta, p.position());
}

ImageProjection project_to_image(const CameraIntrinsics& k, const Eigen::Vector3d& p_cam) {
  ImageProjection out;
  out.depth = p_cam.z();
  out.in_front = p_cam.z() > 0.0;
  if (!out.in_front) return out;
  const Eigen::Vector3d h = k.projection.leftCols<3>() * p_cam + k.projection.col(3);
  if (!(h.z() > 0.0)) {
    out.in_front = false;
    return out;
  }
  out.pixel = h.head<2>() / h.z();
  out.in_image = out.pixel.x() >= 0.0 && out.pixel.x() < k.width && out.pixel.y() >= 0.0 &&
                 out.pixel.y() < k.height;
  return out;
}

Eigen::Vector3d unproject(const CameraIntrinsics& k, const Eigen::Vector2d& pixel, double depth) {
  // Unknowns (x, y, w) with z = depth fixed:
  //   K3 * (x, y, depth) + k4 = w * (u, v, 1)
  const Eigen::Matrix3d k3 = k.projection.leftCols<3>();
  const Eigen::Vector3d k4 = k.projection.col(3);
  Eigen::Matrix3d a;
  a.col(0) = k3.col(0);
  a.col(1) = k3.col(1);
  a.col(2) = -Eigen::Vector3d(pixel.x(), pixel.y(), 1.0);
  const Eigen::Vector3d b = -(k3.col(2) * depth + k4);
  const Eigen::Vector3d sol = a.partialPivLu().solve(b);
  return {sol.x(), sol.y(), depth};
}

PanoramaGeometry PanoramaGeometry::make(double scale, double delta_h, double delta_v,
                                        double azimuth_center, double azimuth_half_width,
                                        double elevation_min, double elevation_max) {
  if (!(scale > 0.0) || !(delta_h > 0.0) || !(delta_v > 0.0))
    throw InvalidArgument("panorama: scale and resolutions must be positive");
  if (!(azimuth_half_width > 0.0) || azimuth_half_width > kPi)
    throw InvalidArgument("panorama: azimuth half width must be in (0, pi]");
  if (!(elevation_max > elevation_min))
    throw InvalidArgument("panorama: elevation_max must exceed elevation_min");
  PanoramaGeometry g;
  g.scale_ = scale;
  g.delta_h_ = delta_h;
  g.delta_v_ = delta_v;
  g.azimuth_center_ = wrap_angle(azimuth_center);
  g.elevation_min_ = elevation_min;
  g.elevation_max_ = elevation_max;
  g.half_cells_ = static_cast<int>(std::ceil(scale * azimuth_half_width / delta_h - 1e-9));
  g.half_cells_ = std::max(g.half_cells_, 1);
  g.width_ = 2 * g.half_cells_ + 1;
  g.height_ =
      static_cast<int>(std::floor(scale * (elevation_max - elevation_min) / delta_v + 0.5)) + 1;
  g.height_ = std::max(g.height_, 2);
  return g;
}

PanoramaGeometry PanoramaGeometry::full_circle(double scale, double delta_h, double delta_v,
                                               double elevation_min, double elevation_max) {
  PanoramaGeometry g =
      make(scale, delta_h, delta_v, 0.0, kPi, elevation_min, elevation_max);
  g.full_360_ = true;
  return g;
}

std::optional<PanoramaCell> cylindrical_project(const Eigen::Vector3d& p,
                                                const PanoramaGeometry& geom) {
  if (!p.allFinite()) throw InvalidArgument("cylindrical_project: non-finite point");
  const double planar = std::hypot(p.x(), p.y());
  if (planar == 0.0 && p.z() == 0.0)
    throw InvalidArgument("cylindrical_project: point at the sensor origin");

  const double azimuth = std::atan2(p.y(), p.x());
  const double elevation = std::atan(p.z() / planar);  // +-pi/2 when planar == 0

  const double offset = wrap_angle(azimuth - geom.azimuth_center());
  const double col_f = geom.scale() * offset / geom.delta_h() + geom.center_col();
  // Round half up: ties go to the larger index.
  const int col = static_cast<int>(std::floor(col_f + 0.5));
  if (col < 0 || col >= geom.width()) {
    if (!geom.full_360()) return std::nullopt;
  }
  const double row_f = geom.scale() * (geom.elevation_max() - elevation) / geom.delta_v();
  const int row = static_cast<int>(std::floor(row_f + 0.5));
  if (row < 0 || row >= geom.height()) return std::nullopt;
  return PanoramaCell{std::clamp(col, 0, geom.width() - 1), row};
}

std::optional<PanoramaCell> cylindrical_project(const Point3& p, const PanoramaGeometry& geom) {
  return cylindrical_project(p.position(), geom);
}

}  // namespace edgecal
