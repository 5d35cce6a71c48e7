#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "edgecal/densify.hpp"
#include "edgecal/geometry.hpp"
#include "edgecal/grid.hpp"

namespace edgecal {

struct CalibrationResult;
struct MultiFrameReport;

// One-shot calibration input.
struct FramePair {
  std::vector<Point3> cloud;
  GrayImage image;
  std::string frame_id;
  std::optional<ExtrinsicParams> truth;
};

// KITTI velodyne layout: little-endian float32 quadruples (x, y, z, r).
// Throws ParseError (with byte offset) for lengths that are not a multiple of
// 16 or for non-finite values.
std::vector<Point3> load_velodyne_bin(const std::filesystem::path& path);
std::vector<Point3> parse_velodyne_bin(const std::vector<unsigned char>& bytes);
void write_velodyne_bin(const std::vector<Point3>& cloud, const std::filesystem::path& path);

// Binary PGM (P5) or PPM (P6, converted with luma 0.299/0.587/0.114), 8 or
// 16 bit, scaled to [0,1].
GrayImage load_gray_image(const std::filesystem::path& path);
GrayImage parse_gray_image(const std::vector<unsigned char>& bytes);
// 8-bit P5, values clamped to [0,1] and rounded to the nearest level.
void write_gray_image(const GrayImage& img, const std::filesystem::path& path);

// KITTI-style calibration text, one "key: v1 v2 ..." per line.
//   P (or P2 / P_rect_02): 12 values, required
//   S (or S_rect_02): image width and height, optional
//   R: 9 values row-major, T: 3 values; together optional ground truth
struct CalibRecord {
  Eigen::Matrix<double, 3, 4> projection = Eigen::Matrix<double, 3, 4>::Zero();
  std::optional<std::pair<int, int>> image_size;  // width, height
  std::optional<ExtrinsicParams> extrinsics;

  // Intrinsics for an image of the given size; the record's own size, when
  // present, must agree.
  CameraIntrinsics intrinsics_for(int width, int height) const;
};

CalibRecord parse_calib(const std::string& text);
CalibRecord load_calib(const std::filesystem::path& path);
void write_calib(const CalibRecord& record, const std::filesystem::path& path);

struct PanoramaScaling {
  double offset = 0.0;  // value = offset + level * step
  double step = 1.0;
};

// 16-bit P5 with big-endian samples. The affine map from stored level back to
// the feature value is written as a "# edgecal-scale <offset> <step>" comment.
PanoramaScaling write_panorama(const Grid<double>& values, const std::filesystem::path& path);
Grid<double> load_panorama(const std::filesystem::path& path);

// Structured key-value text, fixed field order.
void write_result(const CalibrationResult& result, const std::filesystem::path& path);
std::string result_to_text(const CalibrationResult& result);

void write_report(const MultiFrameReport& report, const std::filesystem::path& path);
std::string report_to_text(const MultiFrameReport& report);

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path);
void write_text_file(const std::string& text, const std::filesystem::path& path);

}  // namespace edgecal
