#include "edgecal/cli.hpp"

#include <algorithm>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "edgecal/errors.hpp"
#include "edgecal/image.hpp"
#include "edgecal/io.hpp"

namespace edgecal::cli {

int exit_code_for(std::exception_ptr error) {
  try {
    std::rethrow_exception(error);
  } catch (const NoPlaneError&) {
    return kExitNoPlane;
  } catch (const NoEdgesError&) {
    return kExitNoEdges;
  } catch (const ParseError&) {
    return kExitIo;
  } catch (const IoError&) {
    return kExitIo;
  } catch (const std::filesystem::filesystem_error&) {
    return kExitIo;
  } catch (const InvalidArgument&) {
    return kExitUsage;
  } catch (...) {
    return kExitInternal;
  }
}

std::string exit_code_help() {
  return "Exit codes:\n"
         "  0  converged\n"
         "  1  internal error\n"
         "  2  invalid flags or configuration\n"
         "  3  unreadable or malformed input\n"
         "  4  no ground plane found\n"
         "  5  no LiDAR edge points\n"
         "  6  optimizer did not converge (result still written)\n";
}

LoadedFrame load_frame(const FrameInputs& inputs) {
  LoadedFrame f;
  f.frame.cloud = load_velodyne_bin(inputs.cloud);
  f.frame.image = load_gray_image(inputs.image);
  f.calib = load_calib(inputs.calib);
  f.camera = f.calib.intrinsics_for(f.frame.image.cols(), f.frame.image.rows());
  f.frame.truth = f.calib.extrinsics;
  f.frame.frame_id = inputs.id.empty() ? inputs.cloud.stem().string() : inputs.id;
  return f;
}

std::vector<FrameInputs> load_frame_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open frame list " + path.string());
  const std::filesystem::path dir = path.parent_path();
  auto resolve = [&dir](const std::string& p) {
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : dir / q;
  };
  std::vector<FrameInputs> frames;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    std::istringstream fields(line);
    std::vector<std::string> tok;
    for (std::string t; fields >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    if (tok.size() != 4)
      throw ParseError(fmt::format("{}:{}: expected 'id cloud image calib'", path.string(), line_no));
    frames.push_back({resolve(tok[1]), resolve(tok[2]), resolve(tok[3]), tok[0]});
  }
  if (frames.empty()) throw ParseError(path.string() + ": no frames listed");
  return frames;
}

void write_frame_list(const std::vector<FrameInputs>& frames, const std::filesystem::path& path) {
  const std::filesystem::path dir = path.parent_path();
  std::string out = "# id cloud image calib\n";
  for (const FrameInputs& f : frames)
    out += fmt::format("{} {} {} {}\n", f.id, f.cloud.lexically_relative(dir).string(),
                       f.image.lexically_relative(dir).string(),
                       f.calib.lexically_relative(dir).string());
  write_text_file(out, path);
}

CalibrationResult cmd_calibrate(const CalibrateRequest& request) {
  request.config.validate();
  const LoadedFrame f = load_frame(request.frame);
  const ExtrinsicParams theta0 =
      initial_guess(request.theta0, f.calib.extrinsics, request.config, request.config.seed);
  CalibrationResult result = calibrate(f.frame, f.camera, theta0, request.config);
  if (!request.out.empty()) write_result(result, request.out);
  return result;
}

std::vector<SweepTable> cmd_sweep(const SweepRequest& request) {
  request.config.validate();
  if (request.sweeps.empty()) throw InvalidArgument("sweep: no parameter selected");
  for (const SweepSpec& s : request.sweeps) s.validate();
  const LoadedFrame f = load_frame(request.frame);
  const std::optional<ExtrinsicParams> center =
      request.center ? request.center : f.calib.extrinsics;
  if (!center) throw InvalidArgument("sweep: pass --theta0 or provide R and T in the calib file");
  const FrameFeatures features = extract_features(f.frame, f.camera, *center, request.config);
  if (features.edge_points.empty())
    throw NoEdgesError("frame " + f.frame.frame_id + ": mixed edge map selects no LiDAR point");
  const CostFunction cost = make_cost_function(features, request.config.match_threshold);
  std::vector<SweepTable> tables;
  for (const SweepSpec& s : request.sweeps) {
    tables.push_back(sweep(cost, center->to_vector(), s));
    if (!request.out_dir.empty())
      write_text_file(sweep_to_text(tables.back()),
                      request.out_dir / fmt::format("sweep_{}.tsv", parameter_name(s.parameter)));
  }
  return tables;
}

MultiFrameReport cmd_eval_multiframe(const MultiFrameRequest& request) {
  request.config.validate();
  if (request.jobs < 1) throw InvalidArgument("--jobs must be >= 1");
  const std::vector<FrameInputs> frames = load_frame_list(request.frame_list);
  std::optional<ExtrinsicParams> truth = request.truth;
  if (!truth) truth = load_calib(frames.front().calib).extrinsics;
  if (!truth) throw InvalidArgument("eval-multiframe: ground truth missing from the first calib file");

  std::vector<std::optional<CalibrationResult>> results(frames.size());
  std::vector<std::exception_ptr> errors(frames.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < frames.size(); i = next++) {
      try {
        const LoadedFrame f = load_frame(frames[i]);
        const ExtrinsicParams theta0 =
            initial_guess(std::nullopt, truth, request.config, request.config.seed + i);
        results[i] = calibrate(f.frame, f.camera, theta0, request.config);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int n = std::min<int>(request.jobs, static_cast<int>(frames.size()));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  // Report order is by frame id; seeds stay tied to list positions.
  std::stable_sort(results.begin(), results.end(),
                   [](const auto& a, const auto& b) { return a->frame_id < b->frame_id; });
  std::vector<std::string> ids;
  std::vector<Vector6> estimates;
  std::vector<Termination> terms;
  for (const auto& r : results) {
    ids.push_back(r->frame_id);
    estimates.push_back(r->theta.to_vector());
    terms.push_back(r->trace.termination);
  }
  MultiFrameReport report = summarize_frames(ids, estimates, terms, *truth);
  if (!request.out.empty()) {
    write_report(report, request.out);
    const std::filesystem::path dir = request.out.parent_path();
    for (const auto& r : results) write_result(*r, dir / ("result_" + r->frame_id + ".txt"));
  }
  return report;
}

DumpStage parse_dump_stage(const std::string& name) {
  if (name == "all") return DumpStage::kAll;
  if (name == "camera") return DumpStage::kCamera;
  if (name == "segmentation") return DumpStage::kSegmentation;
  if (name == "panorama") return DumpStage::kPanorama;
  if (name == "edges") return DumpStage::kEdges;
  throw InvalidArgument("unknown stage '" + name +
                        "' (use all, camera, segmentation, panorama, edges)");
}

namespace {

GrayImage to_gray(const BinaryMap& m) {
  GrayImage g(m.rows(), m.cols());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) g(r, c) = m(r, c) ? 1.0 : 0.0;
  return g;
}

// Edge points projected with theta over the dimmed camera image.
GrayImage projection_overlay(const FrameFeatures& f, const GrayImage& image,
                             const ExtrinsicParams& theta) {
  GrayImage out = image;
  for (double& v : out.values()) v *= 0.5;
  for (const EdgePoint& p : f.edge_points.points) {
    const ImageProjection pr = project_to_image(f.camera, transform_point(theta, p.position));
    if (!pr.in_image) continue;
    const int u = static_cast<int>(std::lround(pr.pixel.x()));
    const int v = static_cast<int>(std::lround(pr.pixel.y()));
    if (out.contains(v, u)) out(v, u) = 1.0;
  }
  return out;
}

}  // namespace

std::vector<std::filesystem::path> cmd_dump(const DumpRequest& request) {
  request.config.validate();
  const LoadedFrame f = load_frame(request.frame);
  const ExtrinsicParams theta0 =
      initial_guess(request.theta0, f.calib.extrinsics, request.config, request.config.seed);
  const FrameFeatures features = extract_features(f.frame, f.camera, theta0, request.config);
  const auto want = [&](DumpStage s) {
    return request.stage == DumpStage::kAll || request.stage == s;
  };
  std::vector<std::filesystem::path> written;
  auto gray = [&](const GrayImage& img, const std::string& name) {
    written.push_back(request.out_dir / name);
    write_gray_image(img, written.back());
  };
  auto pano = [&](const Grid<double>& g, const std::string& name) {
    written.push_back(request.out_dir / name);
    write_panorama(g, written.back());
  };
  if (want(DumpStage::kCamera)) {
    gray(features.equalized, "camera_equalized.pgm");
    gray(features.camera_edges, "camera_edges.pgm");
  }
  if (want(DumpStage::kSegmentation)) {
    gray(to_gray(features.foreground), "foreground_mask.pgm");
    gray(to_gray(close(features.foreground, request.config.occlusion_kernel_radius)),
         "foreground_closed.pgm");
  }
  if (want(DumpStage::kPanorama)) {
    for (std::size_t i = 0; i < kFeatures.size(); ++i) {
      const std::string name(feature_name(kFeatures[i]));
      pano(features.sparse[i].values, name + "_sparse.pgm");
      pano(features.dense[i].values, name + "_dense.pgm");
    }
  }
  if (want(DumpStage::kEdges)) {
    for (std::size_t i = 0; i < kFeatures.size(); ++i)
      gray(to_gray(features.edges[i]), std::string(feature_name(kFeatures[i])) + "_canny.pgm");
    pano(features.mixed, "mixed_edges.pgm");
    gray(projection_overlay(features, f.frame.image, theta0), "edge_overlay.pgm");
  }
  return written;
}

synth::LayoutStyle parse_layout_style(const std::string& name) {
  if (name == "urban") return synth::LayoutStyle::kUrban;
  if (name == "cluttered") return synth::LayoutStyle::kCluttered;
  if (name == "sparse") return synth::LayoutStyle::kSparse;
  throw InvalidArgument("unknown layout style '" + name + "' (use urban, cluttered, sparse)");
}

namespace {

FrameInputs render_frame(const synth::SceneSpec& scene, const std::filesystem::path& dir,
                         const std::string& id) {
  FrameInputs f{dir / "cloud.bin", dir / "image.pgm", dir / "calib.txt", id};
  write_velodyne_bin(synth::render_lidar(scene), f.cloud);
  write_gray_image(synth::render_camera(scene), f.image);
  CalibRecord rec;
  rec.projection = scene.camera.projection;
  rec.image_size = std::pair<int, int>{scene.camera.width, scene.camera.height};
  rec.extrinsics = scene.truth;
  write_calib(rec, f.calib);
  write_text_file(synth::scene_to_text(scene), dir / "scene.txt");
  return f;
}

}  // namespace

std::vector<FrameInputs> cmd_synth(const SynthRequest& request) {
  request.scene.validate();
  if (request.frames < 0) throw InvalidArgument("--frames must be >= 0");
  std::vector<FrameInputs> frames;
  if (request.frames == 0) {
    frames.push_back(render_frame(request.scene, request.out_dir, "frame_0000"));
  } else {
    for (int i = 0; i < request.frames; ++i) {
      synth::SceneSpec scene =
          synth::randomize_layout(request.scene, request.layout_seed + i, request.style);
      scene.seed = request.scene.seed + static_cast<std::uint64_t>(i);
      const std::string id = fmt::format("frame_{:04d}", i);
      frames.push_back(render_frame(scene, request.out_dir / id, id));
    }
  }
  write_frame_list(frames, request.out_dir / "frames.txt");
  return frames;
}

}  // namespace edgecal::cli
