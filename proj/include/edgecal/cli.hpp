#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edgecal/config.hpp"
#include "edgecal/pipeline.hpp"
#include "edgecal/synth.hpp"

namespace edgecal::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,       // bad flags or config values
  kExitIo = 3,          // unreadable or malformed input files
  kExitNoPlane = 4,
  kExitNoEdges = 5,
  kExitNoConvergence = 6,
};

// Maps the exception currently being handled to an exit code.
int exit_code_for(std::exception_ptr error);

std::string exit_code_help();

struct FrameInputs {
  std::filesystem::path cloud;
  std::filesystem::path image;
  std::filesystem::path calib;
  std::string id;
};

struct LoadedFrame {
  FramePair frame;
  CameraIntrinsics camera;
  CalibRecord calib;
};

LoadedFrame load_frame(const FrameInputs& inputs);

// One frame per line: "id cloud image calib", '#' comments. Relative paths
// are resolved against the list file's directory.
std::vector<FrameInputs> load_frame_list(const std::filesystem::path& path);
void write_frame_list(const std::vector<FrameInputs>& frames, const std::filesystem::path& path);

struct CalibrateRequest {
  PipelineConfig config;
  FrameInputs frame;
  std::optional<ExtrinsicParams> theta0;
  std::filesystem::path out;
};

// Writes the result file. The caller maps a non-converged termination to
// kExitNoConvergence.
CalibrationResult cmd_calibrate(const CalibrateRequest& request);

struct SweepRequest {
  PipelineConfig config;
  FrameInputs frame;
  std::optional<ExtrinsicParams> center;  // defaults to the calib record's extrinsics
  std::vector<SweepSpec> sweeps;
  std::filesystem::path out_dir;
};

// One "sweep_<param>.tsv" per spec in out_dir.
std::vector<SweepTable> cmd_sweep(const SweepRequest& request);

struct MultiFrameRequest {
  PipelineConfig config;
  std::filesystem::path frame_list;
  std::optional<ExtrinsicParams> truth;  // defaults to the first frame's calib record
  int jobs = 1;
  std::filesystem::path out;
};

// Frame i starts from truth perturbed with seed config.seed + i. Writes the
// report to `out` and each frame's result next to it.
MultiFrameReport cmd_eval_multiframe(const MultiFrameRequest& request);

enum class DumpStage { kAll, kCamera, kSegmentation, kPanorama, kEdges };
DumpStage parse_dump_stage(const std::string& name);

struct DumpRequest {
  PipelineConfig config;
  FrameInputs frame;
  std::optional<ExtrinsicParams> theta0;
  DumpStage stage = DumpStage::kAll;
  std::filesystem::path out_dir;
};

// Returns the files written.
std::vector<std::filesystem::path> cmd_dump(const DumpRequest& request);

struct SynthRequest {
  synth::SceneSpec scene;
  int frames = 0;  // 0: render the scene as is; N: N randomized layouts
  std::uint64_t layout_seed = 1;
  synth::LayoutStyle style = synth::LayoutStyle::kUrban;
  std::filesystem::path out_dir;
};

synth::LayoutStyle parse_layout_style(const std::string& name);

// Writes cloud.bin, image.pgm, calib.txt (with the true extrinsics) and
// scene.txt per frame plus frames.txt listing them. Returns the list.
std::vector<FrameInputs> cmd_synth(const SynthRequest& request);

}  // namespace edgecal::cli
