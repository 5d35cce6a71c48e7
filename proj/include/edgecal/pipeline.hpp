#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "edgecal/config.hpp"
#include "edgecal/densify.hpp"
#include "edgecal/edges.hpp"
#include "edgecal/geometry.hpp"
#include "edgecal/io.hpp"
#include "edgecal/objective.hpp"
#include "edgecal/segmentation.hpp"

namespace edgecal {

inline constexpr std::array<Feature, 3> kFeatures = {Feature::kDepth, Feature::kReflectivity,
                                                     Feature::kObject};

// Everything computed from one frame before optimization. The LiDAR side does
// not depend on theta except through the panorama window, which is fixed from
// the initial guess.
struct FrameFeatures {
  PanoramaGeometry geometry;
  CameraIntrinsics camera;
  GrayImage equalized;
  EdgeMap camera_edges;
  std::vector<EdgeMap> coarse_edges;  // coarsest first, excludes camera_edges
  LabeledCloud labeled;   // before the occlusion filter
  LabeledCloud filtered;  // after it
  BinaryMap foreground;
  std::array<SparsePanorama, 3> sparse;
  std::array<DensePanorama, 3> dense;
  std::array<BinaryMap, 3> edges;
  MixedEdgeMap mixed;
  EdgePointSet edge_points;
};

// Azimuth window centered on the optical axis of theta0, wide enough for the
// horizontal field of view plus the configured padding (or the full circle).
PanoramaGeometry panorama_for_camera(const PipelineConfig& config, const CameraIntrinsics& camera,
                                     const ExtrinsicParams& theta0);

// Throws InvalidArgument for an empty cloud or an image whose size differs
// from the intrinsics, NoPlaneError when RANSAC finds no ground, NoEdgesError
// when no LiDAR point falls inside the panorama window.
FrameFeatures extract_features(const FramePair& frame, const CameraIntrinsics& camera,
                               const ExtrinsicParams& theta0, const PipelineConfig& config);

// Cost J(theta) over the frame's edge points. The returned function refers to
// `features`, which must outlive it.
CostFunction make_cost_function(const FrameFeatures& features, double match_threshold);
CostFunction make_cost_function(const FrameFeatures& features, const EdgeMap& camera_edges,
                                double match_threshold);

struct CalibrationResult {
  std::string frame_id;
  ExtrinsicParams theta0;
  ExtrinsicParams theta;
  CostBreakdown initial_cost;
  CostBreakdown final_cost;
  OptimizerTrace trace;
  std::size_t cloud_points = 0;
  std::size_t occluded_removed = 0;
  std::optional<ExtrinsicParams> truth;
  PipelineConfig config;

  int iterations() const { return static_cast<int>(trace.entries.size()) - 1; }
};

// Full single-frame run. Throws NoEdgesError when no edge point survives.
CalibrationResult calibrate(const FramePair& frame, const CameraIntrinsics& camera,
                            const ExtrinsicParams& theta0, const PipelineConfig& config);

// Optimization only, on features that are already extracted: one ascent per
// coarse edge map, then the final one on camera_edges. The trace holds all
// passes; the termination is that of the final pass.
CalibrationResult calibrate_features(const FrameFeatures& features, const FramePair& frame,
                                     const ExtrinsicParams& theta0, const PipelineConfig& config);

// theta0 for a frame: `explicit_theta0` when given, else the record's
// extrinsics perturbed by the config magnitudes with `seed`. Throws
// InvalidArgument when neither is available.
ExtrinsicParams initial_guess(const std::optional<ExtrinsicParams>& explicit_theta0,
                              const std::optional<ExtrinsicParams>& record,
                              const PipelineConfig& config, std::uint64_t seed);

struct SweepSpec {
  int parameter = 0;  // 0..5 = rx, ry, rz, tx, ty, tz
  double range = 0.3;
  int samples = 61;
  bool normalize = true;

  void validate() const;
};

struct SweepTable {
  int parameter = 0;
  std::vector<double> offsets;
  std::vector<double> values;
};

std::string_view parameter_name(int index);
// Accepts rx..tz or 0..5. Throws InvalidArgument otherwise.
int parameter_index(std::string_view name);

// Evaluates cost(center + offset e_p) for `samples` offsets evenly spaced in
// [-range, range].
SweepTable sweep(const CostFunction& cost, const Vector6& center, const SweepSpec& spec);

// Affine rescale to [0,1]; a constant slice becomes all zeros.
std::vector<double> normalize_slice(const std::vector<double>& values);

std::string sweep_to_text(const SweepTable& table);

struct Quartiles {
  Vector6 min = Vector6::Zero();
  Vector6 q1 = Vector6::Zero();
  Vector6 median = Vector6::Zero();
  Vector6 q3 = Vector6::Zero();
  Vector6 max = Vector6::Zero();
};

struct MultiFrameReport {
  std::vector<std::string> frame_ids;
  std::vector<Vector6> estimates;
  std::vector<Termination> terminations;
  ExtrinsicParams truth;
  Vector6 mean = Vector6::Zero();               // mean estimate
  Vector6 signed_mean_error = Vector6::Zero();  // mean of (estimate - truth)
  Vector6 mae = Vector6::Zero();                // mean of |estimate - truth|
  std::vector<Vector6> residuals;               // estimate - truth, angles wrapped
  Quartiles residual_quartiles;
};

// Linear-interpolation quantile of a non-empty sample.
double quantile(std::vector<double> values, double q);

MultiFrameReport summarize_frames(const std::vector<std::string>& ids,
                                  const std::vector<Vector6>& estimates,
                                  const std::vector<Termination>& terminations,
                                  const ExtrinsicParams& truth);

}  // namespace edgecal
