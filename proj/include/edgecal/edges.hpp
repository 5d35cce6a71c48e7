#pragma once

#include <vector>

#include <Eigen/Core>

#include "edgecal/grid.hpp"
#include "edgecal/segmentation.hpp"

namespace edgecal {

// Per-cell edge probability: the mean of the depth, reflectivity and object
// edge maps.
using MixedEdgeMap = Grid<double>;

struct EdgePoint {
  std::size_t index = 0;  // into the labeled cloud
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double probability = 0.0;  // (0, 1]
};

struct EdgePointSet {
  std::vector<EdgePoint> points;
  std::size_t total_points = 0;  // N, the size of the source cloud

  std::size_t size() const { return points.size(); }  // N_e
  bool empty() const { return points.empty(); }
};

// Throws InvalidArgument on shape mismatch.
MixedEdgeMap mixed_edge_map(const BinaryMap& depth, const BinaryMap& reflectivity,
                            const BinaryMap& object);

// Points whose panorama cell has non-zero probability, in cloud order.
EdgePointSet select_edge_points(const LabeledCloud& cloud, const MixedEdgeMap& mixed);

}  // namespace edgecal
