#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "edgecal/cli.hpp"
#include "edgecal/errors.hpp"

namespace {

using edgecal::ExtrinsicParams;
using edgecal::PipelineConfig;
namespace cli = edgecal::cli;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string out;
};

struct FrameFlags {
  std::string cloud, image, calib, id;
  std::string theta0;
};

void add_common(CLI::App* app, CommonFlags& c) {
  app->add_option("--config", c.config_path, "Pipeline config file (key = value)");
  app->add_option("--seed", c.seed, "Overrides the config seed");
  app->add_option("--set", c.overrides, "Overrides one config key, as key=value (repeatable)");
}

void add_frame(CLI::App* app, FrameFlags& f) {
  app->add_option("--cloud", f.cloud, "Velodyne .bin point cloud")->required();
  app->add_option("--image", f.image, "PGM/PPM camera image")->required();
  app->add_option("--calib", f.calib, "Calibration text file")->required();
  app->add_option("--frame-id", f.id, "Frame identifier (default: cloud file stem)");
  app->add_option("--theta0", f.theta0, "Initial extrinsics \"rx ry rz tx ty tz\"");
}

PipelineConfig build_config(const CommonFlags& c) {
  PipelineConfig cfg = c.config_path.empty() ? PipelineConfig{} : edgecal::load_config(c.config_path);
  std::string text;
  for (const std::string& kv : c.overrides) {
    if (kv.find('=') == std::string::npos)
      throw edgecal::InvalidArgument("--set expects key=value, got '" + kv + "'");
    text += kv + "\n";
  }
  try {
    cfg = edgecal::parse_config(text, cfg);
  } catch (const edgecal::ParseError& e) {
    throw edgecal::InvalidArgument(e.what());
  }
  if (c.seed) cfg.seed = *c.seed;
  cfg.validate();
  return cfg;
}

std::optional<ExtrinsicParams> parse_theta(const std::string& text) {
  if (text.empty()) return std::nullopt;
  std::istringstream in(text);
  edgecal::Vector6 v;
  for (int i = 0; i < 6; ++i)
    if (!(in >> v[i])) throw edgecal::InvalidArgument("--theta0 expects 6 numbers");
  std::string rest;
  if (in >> rest) throw edgecal::InvalidArgument("--theta0 expects 6 numbers");
  return ExtrinsicParams::from_vector(v);
}

cli::FrameInputs frame_inputs(const FrameFlags& f) { return {f.cloud, f.image, f.calib, f.id}; }

void print_theta(const char* label, const ExtrinsicParams& t) {
  std::cout << fmt::format("{} rx={:.6f} ry={:.6f} rz={:.6f} tx={:.4f} ty={:.4f} tz={:.4f}\n",
                           label, t.rx, t.ry, t.rz, t.tx, t.ty, t.tz);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Targetless LiDAR-camera extrinsic calibration from mixed edge features"};
  app.footer(cli::exit_code_help());
  app.require_subcommand(1);

  CommonFlags common;
  FrameFlags frame;

  auto* calibrate = app.add_subcommand("calibrate", "Estimate the extrinsics of one frame");
  add_common(calibrate, common);
  add_frame(calibrate, frame);
  calibrate->add_option("--out", common.out, "Result file")->required();

  auto* sweep = app.add_subcommand("sweep", "Evaluate the cost along 1-D parameter slices");
  add_common(sweep, common);
  add_frame(sweep, frame);
  std::vector<std::string> params;
  double range = 0.3;
  int samples = 61;
  bool normalize = true;
  sweep->add_option("--param", params, "rx ry rz tx ty tz or all (repeatable)")->default_str("all");
  sweep->add_option("--range", range, "Half range of each slice")->capture_default_str();
  sweep->add_option("--samples", samples, "Samples per slice")->capture_default_str();
  sweep->add_flag("--normalize,!--no-normalize", normalize, "Rescale each slice to [0,1]")
      ->capture_default_str();
  sweep->add_option("--out", common.out, "Output directory")->required();

  auto* multi = app.add_subcommand("eval-multiframe", "Calibrate a list of frames and report MAE");
  add_common(multi, common);
  std::string frame_list, truth_text;
  int jobs = 1;
  multi->add_option("--frames", frame_list, "Frame list file (id cloud image calib)")->required();
  multi->add_option("--truth", truth_text, "True extrinsics \"rx ry rz tx ty tz\"");
  multi->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  multi->add_option("--out", common.out, "Report file")->required();

  auto* dump = app.add_subcommand("dump", "Write intermediate images and panoramas");
  add_common(dump, common);
  add_frame(dump, frame);
  std::string stage = "all";
  dump->add_option("--stage", stage, "all, camera, segmentation, panorama or edges")
      ->capture_default_str();
  dump->add_option("--out", common.out, "Output directory")->required();

  auto* synth = app.add_subcommand("synth", "Render synthetic frames with known extrinsics");
  std::string scene_path, style = "urban";
  int frames = 0;
  std::uint64_t layout_seed = 1;
  std::optional<std::uint64_t> synth_seed;
  synth->add_option("--scene", scene_path, "Scene file (default: built-in sensors, random layout)");
  synth->add_option("--frames", frames, "Number of randomized layouts (0 renders the scene as is)")
      ->capture_default_str();
  synth->add_option("--layout-seed", layout_seed, "Seed of the first layout")->capture_default_str();
  synth->add_option("--style", style, "urban, cluttered or sparse")->capture_default_str();
  synth->add_option("--seed", synth_seed, "Overrides the scene noise seed");
  synth->add_option("--out", common.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kExitOk : cli::kExitUsage;
  }

  try {
    if (*calibrate) {
      cli::CalibrateRequest req{build_config(common), frame_inputs(frame), parse_theta(frame.theta0),
                                common.out};
      const edgecal::CalibrationResult r = cli::cmd_calibrate(req);
      print_theta("theta0", r.theta0);
      print_theta("theta ", r.theta);
      std::cout << fmt::format("J={:.6g} matched={}/{} iterations={} termination={}\n",
                               r.final_cost.value, r.final_cost.matched, r.final_cost.edge_count,
                               r.iterations(), edgecal::termination_name(r.trace.termination));
      return r.trace.termination == edgecal::Termination::kConverged ? cli::kExitOk
                                                                      : cli::kExitNoConvergence;
    }
    if (*sweep) {
      cli::SweepRequest req{build_config(common), frame_inputs(frame), parse_theta(frame.theta0), {},
                            common.out};
      if (params.empty() || (params.size() == 1 && params[0] == "all")) params = {"rx", "ry", "rz", "tx", "ty", "tz"};
      for (const std::string& p : params)
        req.sweeps.push_back({edgecal::parameter_index(p), range, samples, normalize});
      for (const edgecal::SweepTable& t : cli::cmd_sweep(req)) {
        const auto best = std::max_element(t.values.begin(), t.values.end()) - t.values.begin();
        std::cout << fmt::format("{}: argmax offset {:+.4f}\n", edgecal::parameter_name(t.parameter),
                                 t.offsets[static_cast<std::size_t>(best)]);
      }
      return cli::kExitOk;
    }
    if (*multi) {
      cli::MultiFrameRequest req{build_config(common), frame_list, parse_theta(truth_text), jobs,
                                 common.out};
      const edgecal::MultiFrameReport r = cli::cmd_eval_multiframe(req);
      std::cout << fmt::format("frames={}\n", r.estimates.size());
      std::cout << fmt::format("MAE rx={:.5f} ry={:.5f} rz={:.5f} tx={:.4f} ty={:.4f} tz={:.4f}\n",
                               r.mae[0], r.mae[1], r.mae[2], r.mae[3], r.mae[4], r.mae[5]);
      return cli::kExitOk;
    }
    if (*dump) {
      cli::DumpRequest req{build_config(common), frame_inputs(frame), parse_theta(frame.theta0),
                           cli::parse_dump_stage(stage), common.out};
      for (const auto& p : cli::cmd_dump(req)) std::cout << p.string() << "\n";
      return cli::kExitOk;
    }
    if (*synth) {
      cli::SynthRequest req;
      req.scene = scene_path.empty() ? edgecal::synth::randomize_layout({}, layout_seed)
                                     : edgecal::synth::load_scene(scene_path);
      if (synth_seed) req.scene.seed = *synth_seed;
      req.frames = frames;
      req.layout_seed = layout_seed;
      req.style = cli::parse_layout_style(style);
      req.out_dir = common.out;
      const auto list = cli::cmd_synth(req);
      std::cout << fmt::format("wrote {} frame(s) to {}\n", list.size(), common.out);
      return cli::kExitOk;
    }
  } catch (...) {
    const std::exception_ptr e = std::current_exception();
    try {
      std::rethrow_exception(e);
    } catch (const std::exception& ex) {
      std::cerr << "error: " << ex.what() << "\n";
    } catch (...) {
      std::cerr << "error: unknown failure\n";
    }
    return cli::exit_code_for(e);
  }
  return cli::kExitUsage;
}
