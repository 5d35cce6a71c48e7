#include "edgecal/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "edgecal/errors.hpp"
#include "edgecal/image.hpp"
#include "edgecal/synth.hpp"

namespace edgecal {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

const CannyThresholds& thresholds_for(const PipelineConfig& config, Feature f) {
  switch (f) {
    case Feature::kDepth:
      return config.canny_depth;
    case Feature::kReflectivity:
      return config.canny_reflectivity;
    case Feature::kObject:
      break;
  }
  return config.canny_object;
}

}  // namespace

PanoramaGeometry panorama_for_camera(const PipelineConfig& config, const CameraIntrinsics& camera,
                                     const ExtrinsicParams& theta0) {
  const double dh = config.panorama_delta_h_deg * kDeg;
  const double dv = config.panorama_delta_v_deg * kDeg;
  const double el_min = config.panorama_elevation_min_deg * kDeg;
  const double el_max = config.panorama_elevation_max_deg * kDeg;
  if (config.panorama_full_360)
    return PanoramaGeometry::full_circle(config.panorama_scale, dh, dv, el_min, el_max);

  // Optical axis in the LiDAR frame is the third row of R.
  const Eigen::Vector3d axis = theta0.rotation().row(2).transpose();
  double center = std::atan2(axis.y(), axis.x());
  // Keep LiDAR azimuths on cell centers.
  const double lattice = dh / config.panorama_scale;
  center = std::round(center / lattice) * lattice;
  const double reach = std::max(camera.cx(), camera.width - 1 - camera.cx());
  const double half = std::min(std::atan(reach / camera.fx()) + config.panorama_pad_deg * kDeg,
                               std::numbers::pi);
  return PanoramaGeometry::make(config.panorama_scale, dh, dv, center, half, el_min, el_max);
}

FrameFeatures extract_features(const FramePair& frame, const CameraIntrinsics& camera,
                               const ExtrinsicParams& theta0, const PipelineConfig& config) {
  config.validate();
  camera.validate();
  if (frame.cloud.empty()) throw InvalidArgument("frame " + frame.frame_id + ": empty point cloud");
  if (frame.image.rows() != camera.height || frame.image.cols() != camera.width)
    throw InvalidArgument(fmt::format("frame {}: image is {}x{} but intrinsics expect {}x{}",
                                      frame.frame_id, frame.image.cols(), frame.image.rows(),
                                      camera.width, camera.height));
  FrameFeatures f;
  f.camera = camera;
  f.geometry = panorama_for_camera(config, camera, theta0);
  f.equalized = histogram_equalize(frame.image, config.camera_bins);
  f.camera_edges = camera_edge_map(frame.image, config.camera_sigma, config.camera_bins);
  for (int k = config.camera_coarse_levels; k >= 1; --k)
    f.coarse_edges.push_back(
        camera_edge_map(frame.image, config.camera_sigma * std::ldexp(1.0, k), config.camera_bins));

  f.labeled = label_cloud(frame.cloud, f.geometry, config.segmentation_options());
  f.foreground = foreground_mask(f.labeled, f.geometry);
  f.filtered = occlusion_filter(f.labeled, f.geometry, config.occlusion_kernel_radius);

  const TvOptions tv = config.tv_options();
  for (std::size_t i = 0; i < kFeatures.size(); ++i) {
    f.sparse[i] = build_sparse_panorama(f.filtered, kFeatures[i], f.geometry);
    if (f.sparse[i].observed() == 0)
      throw NoEdgesError("frame " + frame.frame_id + ": no LiDAR point inside the panorama window");
    f.dense[i] = tv_inpaint(f.sparse[i], tv);
    const CannyThresholds& t = thresholds_for(config, kFeatures[i]);
    f.edges[i] = canny(f.dense[i].values, config.canny_sigma, t.low, t.high);
  }
  f.mixed = mixed_edge_map(f.edges[0], f.edges[1], f.edges[2]);
  f.edge_points = select_edge_points(f.filtered, f.mixed);
  return f;
}

CostFunction make_cost_function(const FrameFeatures& features, double match_threshold) {
  return make_cost_function(features, features.camera_edges, match_threshold);
}

CostFunction make_cost_function(const FrameFeatures& features, const EdgeMap& camera_edges,
                                double match_threshold) {
  return [&features, &camera_edges, match_threshold](const Vector6& v) {
    return evaluate_cost(ExtrinsicParams::from_vector(v), features.edge_points, camera_edges,
                         features.camera, match_threshold)
        .value;
  };
}

CalibrationResult calibrate_features(const FrameFeatures& features, const FramePair& frame,
                                     const ExtrinsicParams& theta0, const PipelineConfig& config) {
  if (features.edge_points.empty())
    throw NoEdgesError("frame " + frame.frame_id + ": mixed edge map selects no LiDAR point");
  CalibrationResult r;
  r.frame_id = frame.frame_id;
  r.theta0 = theta0;
  r.truth = frame.truth;
  r.config = config;
  r.cloud_points = frame.cloud.size();
  r.occluded_removed = features.labeled.size() - features.filtered.size();
  r.initial_cost = evaluate_cost(theta0, features.edge_points, features.camera_edges,
                                 features.camera, config.match_threshold);

  std::vector<const EdgeMap*> passes;
  for (const EdgeMap& m : features.coarse_edges) passes.push_back(&m);
  passes.push_back(&features.camera_edges);
  Vector6 theta = theta0.to_vector();
  for (const EdgeMap* map : passes) {
    const CostFunction cost = make_cost_function(features, *map, config.match_threshold);
    AscentResult ascent = bb_ascent(cost, theta, config.ascent_options());
    theta = ascent.theta;
    // Each pass starts where the previous one ended; keep its start entry only once.
    const bool first = r.trace.entries.empty();
    r.trace.entries.insert(r.trace.entries.end(), ascent.trace.entries.begin() + (first ? 0 : 1),
                           ascent.trace.entries.end());
    r.trace.termination = ascent.trace.termination;
  }
  r.theta = ExtrinsicParams::from_vector(theta);
  r.final_cost = evaluate_cost(r.theta, features.edge_points, features.camera_edges,
                               features.camera, config.match_threshold);
  return r;
}

CalibrationResult calibrate(const FramePair& frame, const CameraIntrinsics& camera,
                            const ExtrinsicParams& theta0, const PipelineConfig& config) {
  const FrameFeatures features = extract_features(frame, camera, theta0, config);
  return calibrate_features(features, frame, theta0, config);
}

ExtrinsicParams initial_guess(const std::optional<ExtrinsicParams>& explicit_theta0,
                              const std::optional<ExtrinsicParams>& record,
                              const PipelineConfig& config, std::uint64_t seed) {
  if (explicit_theta0) return *explicit_theta0;
  if (!record)
    throw InvalidArgument("no initial extrinsics: pass --theta0 or provide R and T in the calib file");
  Vector6 mag;
  mag << config.perturb_rotation, config.perturb_rotation, config.perturb_rotation,
      config.perturb_translation, config.perturb_translation, config.perturb_translation;
  return synth::perturb(*record, mag, seed);
}

void SweepSpec::validate() const {
  if (parameter < 0 || parameter > 5) throw InvalidArgument("sweep: parameter index must be 0..5");
  if (!(range > 0.0) || !std::isfinite(range)) throw InvalidArgument("sweep: range must be > 0");
  if (samples < 3) throw InvalidArgument("sweep: samples must be >= 3");
}

std::string_view parameter_name(int index) {
  static constexpr std::array<std::string_view, 6> kNames = {"rx", "ry", "rz", "tx", "ty", "tz"};
  if (index < 0 || index > 5) throw InvalidArgument("parameter index must be 0..5");
  return kNames[static_cast<std::size_t>(index)];
}

int parameter_index(std::string_view name) {
  for (int i = 0; i < 6; ++i)
    if (name == parameter_name(i) || name == std::to_string(i)) return i;
  throw InvalidArgument("unknown parameter '" + std::string(name) + "' (use rx ry rz tx ty tz)");
}

SweepTable sweep(const CostFunction& cost, const Vector6& center, const SweepSpec& spec) {
  spec.validate();
  SweepTable t;
  t.parameter = spec.parameter;
  for (int s = 0; s < spec.samples; ++s) {
    const double offset = -spec.range + 2.0 * spec.range * s / (spec.samples - 1);
    Vector6 theta = center;
    theta[spec.parameter] += offset;
    t.offsets.push_back(offset);
    t.values.push_back(cost(theta));
  }
  if (spec.normalize) t.values = normalize_slice(t.values);
  return t;
}

std::vector<double> normalize_slice(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, span = *hi - *lo;
  std::vector<double> out(values.size(), 0.0);
  if (!(span > 0.0)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - min) / span;
  return out;
}

std::string sweep_to_text(const SweepTable& table) {
  std::string out = fmt::format("# offset\tJ\t({})\n", parameter_name(table.parameter));
  for (std::size_t i = 0; i < table.offsets.size(); ++i)
    out += format_double(table.offsets[i]) + "\t" + format_double(table.values[i]) + "\n";
  return out;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

MultiFrameReport summarize_frames(const std::vector<std::string>& ids,
                                  const std::vector<Vector6>& estimates,
                                  const std::vector<Termination>& terminations,
                                  const ExtrinsicParams& truth) {
  if (estimates.empty()) throw InvalidArgument("multi-frame summary needs at least one frame");
  if (ids.size() != estimates.size() || terminations.size() != estimates.size())
    throw InvalidArgument("multi-frame summary: mismatched frame lists");
  MultiFrameReport r;
  r.frame_ids = ids;
  r.estimates = estimates;
  r.terminations = terminations;
  r.truth = truth;
  const Vector6 t = truth.to_vector();
  const double n = static_cast<double>(estimates.size());
  for (const Vector6& e : estimates) {
    Vector6 res = e - t;
    for (int i = 0; i < 3; ++i) res[i] = wrap_angle(res[i]);
    r.residuals.push_back(res);
    r.mean += e / n;
    r.signed_mean_error += res / n;
    r.mae += res.cwiseAbs() / n;
  }
  for (int i = 0; i < 6; ++i) {
    std::vector<double> column;
    for (const Vector6& res : r.residuals) column.push_back(res[i]);
    r.residual_quartiles.min[i] = quantile(column, 0.0);
    r.residual_quartiles.q1[i] = quantile(column, 0.25);
    r.residual_quartiles.median[i] = quantile(column, 0.5);
    r.residual_quartiles.q3[i] = quantile(column, 0.75);
    r.residual_quartiles.max[i] = quantile(column, 1.0);
  }
  return r;
}

}  // namespace edgecal
