#pragma once

#include <functional>
#include <string_view>
#include <vector>

#include "edgecal/edges.hpp"
#include "edgecal/geometry.hpp"
#include "edgecal/grid.hpp"

namespace edgecal {

struct CostBreakdown {
  double value = 0.0;         // J = precision * raw_sum
  std::size_t matched = 0;    // N_m
  std::size_t edge_count = 0; // N_e
  double precision = 0.0;     // N_m / N_e
  double raw_sum = 0.0;       // sum of E_C * P over in-image edge points
};

// Projects every edge point with theta and K, samples the camera edge map
// bilinearly and accumulates E_C * P. A point is matched when its sample is
// >= match_threshold; points behind the camera or outside the image add
// nothing and stay unmatched. Throws NoEdgesError for an empty edge set.
CostBreakdown evaluate_cost(const ExtrinsicParams& theta, const EdgePointSet& edges,
                            const EdgeMap& camera_edges, const CameraIntrinsics& k,
                            double match_threshold);

using CostFunction = std::function<double(const Vector6&)>;

// Central differences, one component at a time.
Vector6 numeric_gradient(const CostFunction& cost, const Vector6& theta, const Vector6& delta_h);

enum class Termination { kConverged, kMaxIter, kDegenerateStep };

std::string_view termination_name(Termination t);

struct TraceEntry {
  Vector6 theta = Vector6::Zero();
  double cost = 0.0;
  double gradient_norm = 0.0;
  double step = 0.0;  // length of the step that produced this entry (0 for the start)
};

struct OptimizerTrace {
  std::vector<TraceEntry> entries;
  Termination termination = Termination::kMaxIter;
};

struct AscentOptions {
  double epsilon = 1e-5;   // stop when the step norm drops to this
  int max_iter = 200;
  Vector6 delta_h = (Vector6() << 1e-3, 1e-3, 1e-3, 1e-3, 1e-3, 1e-3).finished();
  double gamma0 = 1e-2;    // first step length and fallback
  double max_step = 0.02;  // cap on any single step length
  double gradient_tol = 1e-10;
  // A step is accepted when J stays at or above the lowest J of the last
  // `window` accepted iterates; otherwise it is halved, at most
  // max_backtracks times. 0 disables the check.
  int nonmonotone_window = 10;
  int max_backtracks = 4;
};

struct AscentResult {
  Vector6 theta = Vector6::Zero();
  OptimizerTrace trace;
};

// Normalized gradient ascent with Barzilai-Borwein step lengths. Each step
// moves a distance gamma along G/||G||, where gamma is the BB scalar
// s^T s / (-s^T g) scaled by ||G||, so the update equals theta + alpha * G.
// Non-positive or non-finite BB scalars fall back to gamma0.
AscentResult bb_ascent(const CostFunction& cost, const Vector6& theta0,
                       const AscentOptions& options);

}  // namespace edgecal
