#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "edgecal/densify.hpp"
#include "edgecal/objective.hpp"
#include "edgecal/segmentation.hpp"

namespace edgecal {

struct CannyThresholds {
  double low = 0.1;
  double high = 0.3;

  bool operator==(const CannyThresholds&) const = default;
};

// Every tunable of the pipeline. Angles in the file are degrees where the key
// says so; everything else uses meters, radians or plain counts.
struct PipelineConfig {
  // segmentation
  double ransac_gamma = 0.2;
  int ransac_iterations = 300;
  double ransac_early_exit_ratio = 0.8;
  std::uint64_t ransac_seed = 1;
  double dbscan_radius = 0.25;
  int dbscan_min_points = 8;
  double foreground_delta = 12.0;
  int occlusion_kernel_radius = 2;

  // panorama
  double panorama_scale = 1.0;
  double panorama_delta_h_deg = 0.2;
  double panorama_delta_v_deg = 28.0 / 31.0;
  double panorama_elevation_min_deg = -25.0;
  double panorama_elevation_max_deg = 3.0;
  double panorama_pad_deg = 10.0;
  bool panorama_full_360 = false;

  // dense completion
  double tv_lambda = 0.05;
  int tv_max_iter = 400;
  double tv_tol = 1e-5;
  int tv_prox_iter = 10;

  // camera edges
  int camera_bins = 256;
  double camera_sigma = 3.0;
  // Extra optimization passes on edge maps blurred with sigma * 2^k,
  // k = levels..1, before the final pass at camera_sigma.
  int camera_coarse_levels = 3;

  // LiDAR edges
  double canny_sigma = 1.4;
  CannyThresholds canny_depth{0.08, 0.2};
  CannyThresholds canny_reflectivity{0.15, 0.4};
  CannyThresholds canny_object{0.1, 0.3};

  // objective and optimizer
  double match_threshold = 0.2;
  double opt_delta_rot = 1e-3;
  double opt_delta_trans = 1e-3;
  double opt_gamma0 = 1e-2;
  double opt_epsilon = 1e-5;
  int opt_max_iter = 200;
  double opt_max_step = 0.02;
  int opt_nonmonotone_window = 10;

  // initial-guess perturbation (uniform, per component) and its seed
  double perturb_rotation = 0.0;
  double perturb_translation = 0.0;
  std::uint64_t seed = 0;

  // Throws InvalidArgument naming the offending key.
  void validate() const;

  SegmentationOptions segmentation_options() const;
  TvOptions tv_options() const;
  AscentOptions ascent_options() const;

  bool operator==(const PipelineConfig&) const = default;
};

// Names of all keys, in file order.
std::vector<std::string> config_keys();

// `key = value` lines with '#' comments. Unknown keys raise ParseError listing
// the valid ones. Keys not present keep the values already in `base`.
PipelineConfig parse_config(const std::string& text, PipelineConfig base = {});
PipelineConfig load_config(const std::filesystem::path& path);

// One line per key in config_keys() order; doubles printed round-trip exact.
std::string config_to_text(const PipelineConfig& config);
void write_config(const PipelineConfig& config, const std::filesystem::path& path);

// Formats a double so that parsing it back yields the same value.
std::string format_double(double v);

}  // namespace edgecal
