#include "edgecal/edges.hpp"

#include "edgecal/errors.hpp"

namespace edgecal {

MixedEdgeMap mixed_edge_map(const BinaryMap& depth, const BinaryMap& reflectivity,
                            const BinaryMap& object) {
  if (!depth.same_shape(reflectivity) || !depth.same_shape(object))
    throw InvalidArgument("mixed_edge_map: edge maps differ in size");
  MixedEdgeMap out(depth.rows(), depth.cols());
  auto d = depth.values();
  auto r = reflectivity.values();
  auto o = object.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const int hits = (d[i] != 0) + (r[i] != 0) + (o[i] != 0);
    dst[i] = hits / 3.0;
  }
  return out;
}

EdgePointSet select_edge_points(const LabeledCloud& cloud, const MixedEdgeMap& mixed) {
  EdgePointSet out;
  out.total_points = cloud.size();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& cell = cloud.cell[i];
    if (!cell || !mixed.contains(cell->row, cell->col)) continue;
    const double p = mixed(cell->row, cell->col);
    if (p > 0.0) out.points.push_back({i, cloud.points[i].position(), p});
  }
  return out;
}

}  // namespace edgecal
