#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "edgecal/geometry.hpp"

namespace edgecal::oracle {

// Independent DBSCAN: O(n^2) neighborhoods, union-find over core points,
// clusters numbered by their lowest-index core, border points to the
// lowest-numbered cluster owning a core neighbor.
inline std::vector<int> dbscan_oracle(const std::vector<Point3>& pts, double radius, int min_points) {
  const std::size_t n = pts.size();
  auto near = [&](std::size_t i, std::size_t j) {
    return (pts[i].position() - pts[j].position()).squaredNorm() <= radius * radius;
  };
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) {
    int count = 0;
    for (std::size_t j = 0; j < n; ++j) count += near(i, j);
    core[i] = count >= min_points;
  }
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (core[i] && core[j] && near(i, j)) parent[std::max(find(i), find(j))] = std::min(find(i), find(j));

  std::vector<int> root_id(n, 0), label(n, 0);
  int next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    const std::size_t r = find(i);
    if (root_id[r] == 0) root_id[r] = ++next;
    label[i] = root_id[r];
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    int best = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (core[j] && near(i, j) && (best == 0 || label[j] < best)) best = label[j];
    label[i] = best;
  }
  return label;
}

}  // namespace edgecal::oracle
