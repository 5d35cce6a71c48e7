#include "edgecal/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <unordered_map>

#include <Eigen/Geometry>

#include "edgecal/errors.hpp"
#include "edgecal/image.hpp"

namespace edgecal {

RansacResult ransac_plane(std::span<const Point3> cloud, const RansacOptions& options) {
  if (!(options.gamma > 0.0)) throw InvalidArgument("ransac_plane: gamma must be positive");
  if (options.iterations < 1) throw InvalidArgument("ransac_plane: iterations must be >= 1");
  const std::size_t n = cloud.size();
  if (n < 3) throw NoPlaneError("ransac_plane: fewer than 3 points");

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  PlaneModel best;
  bool found = false;
  for (int it = 0; it < options.iterations; ++it) {
    const std::size_t i0 = pick(rng);
    std::size_t i1 = pick(rng);
    std::size_t i2 = pick(rng);
    if (i0 == i1 || i0 == i2 || i1 == i2) continue;
    const Eigen::Vector3d p0 = cloud[i0].position();
    const Eigen::Vector3d e1 = cloud[i1].position() - p0;
    const Eigen::Vector3d e2 = cloud[i2].position() - p0;
    Eigen::Vector3d normal = e1.cross(e2);
    const double norm = normal.norm();
    if (!(norm > 1e-12 * e1.norm() * e2.norm()) || norm == 0.0) continue;  // collinear
    normal /= norm;

    PlaneModel candidate{normal.x(), normal.y(), normal.z(), -normal.dot(p0), 0};
    std::size_t count = 0;
    for (const Point3& p : cloud)
      if (candidate.distance(p.position()) <= options.gamma) ++count;
    candidate.inlier_count = count;
    if (!found || count > best.inlier_count) {
      best = candidate;
      found = true;
    }
    if (static_cast<double>(best.inlier_count) > options.early_exit_ratio * static_cast<double>(n))
      break;
  }
  if (!found) throw NoPlaneError("ransac_plane: every sampled triple was degenerate");

  RansacResult out;
  out.plane = best;
  for (std::size_t i = 0; i < n; ++i) {
    if (best.distance(cloud[i].position()) <= options.gamma)
      out.inliers.push_back(i);
    else
      out.non_plane.push_back(i);
  }
  return out;
}

namespace {

// Uniform voxel hash with cell edge equal to the search radius, so every
// neighbor lies in the 27 surrounding cells.
class VoxelIndex {
 public:
  VoxelIndex(std::span<const Point3> points, double radius)
      : points_(points), radius_(radius), radius2_(radius * radius) {
    for (std::size_t i = 0; i < points.size(); ++i) cells_[key(cell_of(points[i]))].push_back(i);
  }

  // Neighbors within the radius (inclusive), self included, ascending index.
  void query(std::size_t i, std::vector<std::size_t>& out) const {
    out.clear();
    const auto [cx, cy, cz] = cell_of(points_[i]);
    const Point3& p = points_[i];
    for (long dx = -1; dx <= 1; ++dx)
      for (long dy = -1; dy <= 1; ++dy)
        for (long dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find(key({cx + dx, cy + dy, cz + dz}));
          if (it == cells_.end()) continue;
          for (std::size_t j : it->second) {
            const double ddx = points_[j].x - p.x, ddy = points_[j].y - p.y,
                         ddz = points_[j].z - p.z;
            if (ddx * ddx + ddy * ddy + ddz * ddz <= radius2_) out.push_back(j);
          }
        }
    std::sort(out.begin(), out.end());
  }

 private:
  using CellKey = std::array<long, 3>;

  CellKey cell_of(const Point3& p) const {
    return {static_cast<long>(std::floor(p.x / radius_)), static_cast<long>(std::floor(p.y / radius_)),
            static_cast<long>(std::floor(p.z / radius_))};
  }
  static std::uint64_t key(const CellKey& c) {
    constexpr std::uint64_t kMask = (1u << 21) - 1;
    return ((static_cast<std::uint64_t>(c[0]) & kMask) << 42) |
           ((static_cast<std::uint64_t>(c[1]) & kMask) << 21) |
           (static_cast<std::uint64_t>(c[2]) & kMask);
  }

  std::span<const Point3> points_;
  double radius_;
  double radius2_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> cells_;
};

}  // namespace

std::vector<int> dbscan(std::span<const Point3> points, double radius, int min_points) {
  if (!(radius > 0.0)) throw InvalidArgument("dbscan: radius must be positive");
  if (min_points < 1) throw InvalidArgument("dbscan: min_points must be >= 1");
  const std::size_t n = points.size();
  std::vector<int> label(n, 0);
  if (n == 0) return label;

  const VoxelIndex index(points, radius);
  std::vector<std::uint8_t> core(n, 0);
  std::vector<std::size_t> nbrs;
  for (std::size_t i = 0; i < n; ++i) {
    index.query(i, nbrs);
    core[i] = nbrs.size() >= static_cast<std::size_t>(min_points);
  }

  int next_id = 0;
  std::deque<std::size_t> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    if (label[i] != 0 || !core[i]) continue;
    const int id = ++next_id;
    label[i] = id;
    frontier.assign(1, i);
    while (!frontier.empty()) {
      const std::size_t q = frontier.front();
      frontier.pop_front();
      index.query(q, nbrs);
      for (std::size_t j : nbrs) {
        if (label[j] != 0) continue;
        label[j] = id;
        if (core[j]) frontier.push_back(j);
      }
    }
  }
  return label;
}

double centroid_distance(std::span<const Point3> points, std::span<const std::size_t> members) {
  if (members.empty()) throw InvalidArgument("centroid_distance: empty cluster");
  std::vector<double> radii;
  radii.reserve(members.size());
  for (std::size_t m : members) radii.push_back(std::hypot(points[m].x, points[m].y));
  std::sort(radii.begin(), radii.end());
  return std::accumulate(radii.begin(), radii.end(), 0.0) / static_cast<double>(radii.size());
}

std::vector<Cluster> gather_clusters(std::span<const Point3> points, std::span<const int> labels) {
  if (points.size() != labels.size())
    throw InvalidArgument("gather_clusters: label count does not match point count");
  int max_id = 0;
  for (int l : labels) max_id = std::max(max_id, l);
  std::vector<Cluster> clusters(static_cast<std::size_t>(max_id));
  for (int k = 0; k < max_id; ++k) clusters[static_cast<std::size_t>(k)].id = k + 1;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] > 0) clusters[static_cast<std::size_t>(labels[i] - 1)].members.push_back(i);
  for (Cluster& c : clusters)
    if (!c.members.empty()) c.centroid_distance = centroid_distance(points, c.members);
  return clusters;
}

std::vector<ObjectFlag> classify_clusters(std::span<const Cluster> clusters,
                                          std::span<const Point3> points, double delta) {
  if (!(delta > 0.0)) throw InvalidArgument("classify_clusters: delta must be positive");
  std::vector<ObjectFlag> flags;
  flags.reserve(clusters.size());
  for (const Cluster& c : clusters) {
    const double dk = centroid_distance(points, c.members);
    flags.push_back(dk < delta ? ObjectFlag::kForeground : ObjectFlag::kBackground);
  }
  return flags;
}

LabeledCloud label_cloud(std::span<const Point3> cloud, const PanoramaGeometry& geom,
                         const SegmentationOptions& options) {
  LabeledCloud out;
  out.points.assign(cloud.begin(), cloud.end());
  out.cluster_id.assign(cloud.size(), 0);
  out.flag.assign(cloud.size(), ObjectFlag::kBackground);
  out.cell.resize(cloud.size());

  const RansacResult ground = ransac_plane(cloud, options.ransac);
  std::vector<Point3> objects;
  objects.reserve(ground.non_plane.size());
  for (std::size_t i : ground.non_plane) objects.push_back(cloud[i]);

  const std::vector<int> labels =
      dbscan(objects, options.dbscan_radius, options.dbscan_min_points);
  const std::vector<Cluster> clusters = gather_clusters(objects, labels);
  const std::vector<ObjectFlag> cluster_flags =
      classify_clusters(clusters, objects, options.foreground_delta);

  for (std::size_t k = 0; k < objects.size(); ++k) {
    const std::size_t i = ground.non_plane[k];
    out.cluster_id[i] = labels[k];
    if (labels[k] > 0) out.flag[i] = cluster_flags[static_cast<std::size_t>(labels[k] - 1)];
  }
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud[i];
    if (p.x == 0.0 && p.y == 0.0 && p.z == 0.0) continue;
    out.cell[i] = cylindrical_project(p, geom);
  }
  return out;
}

BinaryMap foreground_mask(const LabeledCloud& cloud, const PanoramaGeometry& geom) {
  BinaryMap mask(geom.height(), geom.width(), 0);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    if (cloud.flag[i] == ObjectFlag::kForeground && cloud.cell[i])
      mask(cloud.cell[i]->row, cloud.cell[i]->col) = 1;
  return mask;
}

LabeledCloud occlusion_filter(const LabeledCloud& cloud, const PanoramaGeometry& geom,
                              int kernel_radius) {
  const BinaryMap closed = close(foreground_mask(cloud, geom), kernel_radius);
  LabeledCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& cell = cloud.cell[i];
    if (cloud.flag[i] == ObjectFlag::kBackground && cell && closed(cell->row, cell->col)) continue;
    out.points.push_back(cloud.points[i]);
    out.cluster_id.push_back(cloud.cluster_id[i]);
    out.flag.push_back(cloud.flag[i]);
    out.cell.push_back(cell);
  }
  return out;
}

}  // namespace edgecal
