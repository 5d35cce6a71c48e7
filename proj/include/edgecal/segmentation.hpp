#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "edgecal/geometry.hpp"
#include "edgecal/grid.hpp"

namespace edgecal {

// Object flag per point. kEmpty marks panorama cells without a return and
// never appears on a point.
enum class ObjectFlag : std::uint8_t { kEmpty = 0, kBackground = 1, kForeground = 2 };

// A*x + B*y + C*z + D = 0 with (A,B,C) unit length.
struct PlaneModel {
  double a = 0.0, b = 0.0, c = 1.0, d = 0.0;
  std::size_t inlier_count = 0;

  double distance(const Eigen::Vector3d& p) const {
    return std::abs(a * p.x() + b * p.y() + c * p.z() + d);
  }
  Eigen::Vector3d normal() const { return {a, b, c}; }
};

struct RansacResult {
  PlaneModel plane;
  std::vector<std::size_t> inliers;      // distance <= gamma
  std::vector<std::size_t> non_plane;    // distance > gamma
};

struct RansacOptions {
  double gamma = 0.2;  // meters
  int iterations = 300;
  std::uint64_t seed = 0;
  double early_exit_ratio = 0.8;
};

// Three-point RANSAC plane fit. Collinear samples are skipped; throws
// NoPlaneError when no trial yields a plane.
RansacResult ransac_plane(std::span<const Point3> cloud, const RansacOptions& options);

// Density-based clustering with Euclidean radius `radius` and core threshold
// `min_points` (the point itself counts). Returns 0 for noise, 1..K for
// clusters. Clusters are numbered in order of their lowest-index core point;
// a border point joins the first cluster that reaches it.
std::vector<int> dbscan(std::span<const Point3> points, double radius, int min_points);

struct Cluster {
  int id = 0;
  std::vector<std::size_t> members;  // indices into the clustered point list
  double centroid_distance = 0.0;    // mean planar range sqrt(x^2 + y^2)
};

// Groups DBSCAN labels into clusters (noise excluded) and fills d_k.
std::vector<Cluster> gather_clusters(std::span<const Point3> points, std::span<const int> labels);

// Mean planar range of the given members. Summation runs over sorted radii so
// the result does not depend on member order.
double centroid_distance(std::span<const Point3> points, std::span<const std::size_t> members);

// kForeground when d_k < delta, kBackground otherwise. Throws
// InvalidArgument for an empty cluster.
std::vector<ObjectFlag> classify_clusters(std::span<const Cluster> clusters,
                                          std::span<const Point3> points, double delta);

struct LabeledCloud {
  std::vector<Point3> points;
  std::vector<int> cluster_id;
  std::vector<ObjectFlag> flag;
  std::vector<std::optional<PanoramaCell>> cell;

  std::size_t size() const { return points.size(); }
};

struct SegmentationOptions {
  RansacOptions ransac;
  double dbscan_radius = 0.25;
  int dbscan_min_points = 8;
  double foreground_delta = 12.0;
};

// Ground removal, clustering and foreground labeling over the whole cloud,
// then cylindrical projection of every point. Plane inliers and DBSCAN noise
// get kBackground.
LabeledCloud label_cloud(std::span<const Point3> cloud, const PanoramaGeometry& geom,
                         const SegmentationOptions& options);

// Binary panorama of cells holding at least one foreground point.
BinaryMap foreground_mask(const LabeledCloud& cloud, const PanoramaGeometry& geom);

// Removes background points whose cell falls inside the morphological closing
// of the foreground mask. Foreground points are never removed.
LabeledCloud occlusion_filter(const LabeledCloud& cloud, const PanoramaGeometry& geom,
                              int kernel_radius);

}  // namespace edgecal
