#include "edgecal/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/LU>
#include <fmt/format.h>

#include "edgecal/config.hpp"
#include "edgecal/errors.hpp"
#include "edgecal/pipeline.hpp"

namespace edgecal {

static_assert(std::endian::native == std::endian::little, "velodyne I/O assumes little endian");

std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

namespace {

void write_bytes(const std::filesystem::path& path, const char* data, std::size_t n) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(data, static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

void write_text_file(const std::string& text, const std::filesystem::path& path) {
  write_bytes(path, text.data(), text.size());
}

// ---------------------------------------------------------------- velodyne

std::vector<Point3> parse_velodyne_bin(const std::vector<unsigned char>& bytes) {
  if (bytes.size() % 16 != 0)
    throw ParseError(fmt::format("velodyne: length {} is not a multiple of 16 (trailing record at "
                                 "byte offset {})",
                                 bytes.size(), bytes.size() - bytes.size() % 16));
  std::vector<Point3> cloud(bytes.size() / 16);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    float v[4];
    std::memcpy(v, bytes.data() + 16 * i, 16);
    for (int k = 0; k < 4; ++k)
      if (!std::isfinite(v[k]))
        throw ParseError(fmt::format("velodyne: non-finite value at byte offset {}", 16 * i + 4 * k));
    cloud[i] = {v[0], v[1], v[2], v[3]};
  }
  return cloud;
}

std::vector<Point3> load_velodyne_bin(const std::filesystem::path& path) {
  try {
    return parse_velodyne_bin(read_file_bytes(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_velodyne_bin(const std::vector<Point3>& cloud, const std::filesystem::path& path) {
  std::vector<float> buf;
  buf.reserve(cloud.size() * 4);
  for (const Point3& p : cloud) {
    buf.push_back(static_cast<float>(p.x));
    buf.push_back(static_cast<float>(p.y));
    buf.push_back(static_cast<float>(p.z));
    buf.push_back(static_cast<float>(p.reflectivity));
  }
  write_bytes(path, reinterpret_cast<const char*>(buf.data()), buf.size() * sizeof(float));
}

// ---------------------------------------------------------------- netpbm

namespace {

struct NetpbmHeader {
  std::string magic;
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
  std::vector<std::string> comments;
};

NetpbmHeader parse_netpbm_header(const std::vector<unsigned char>& bytes) {
  NetpbmHeader h;
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        const std::size_t start = pos + 1;
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
        h.comments.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                bytes.begin() + static_cast<std::ptrdiff_t>(pos));
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto token = [&] {
    skip_space();
    std::string t;
    while (pos < bytes.size() && !std::isspace(bytes[pos]) && bytes[pos] != '#')
      t.push_back(static_cast<char>(bytes[pos++]));
    return t;
  };
  auto number = [&](const char* what) {
    const std::string t = token();
    int v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || v <= 0)
      throw ParseError(fmt::format("image: bad {} '{}'", what, t));
    return v;
  };
  if (bytes.size() < 2) throw ParseError("image: file too short");
  h.magic = {static_cast<char>(bytes[0]), static_cast<char>(bytes[1])};
  pos = 2;
  if (h.magic != "P5" && h.magic != "P6")
    throw ParseError("image: unsupported magic number '" + h.magic + "' (expected P5 or P6)");
  h.width = number("width");
  h.height = number("height");
  h.maxval = number("maxval");
  if (h.maxval > 65535) throw ParseError("image: maxval above 65535");
  if (pos >= bytes.size() || !std::isspace(bytes[pos]))
    throw ParseError("image: missing whitespace after header");
  h.data_offset = pos + 1;
  return h;
}

}  // namespace

GrayImage parse_gray_image(const std::vector<unsigned char>& bytes) {
  const NetpbmHeader h = parse_netpbm_header(bytes);
  const int channels = h.magic == "P6" ? 3 : 1;
  const int sample_bytes = h.maxval > 255 ? 2 : 1;
  const std::size_t need = static_cast<std::size_t>(h.width) * static_cast<std::size_t>(h.height) *
                           static_cast<std::size_t>(channels * sample_bytes);
  if (bytes.size() - h.data_offset != need)
    throw ParseError(fmt::format("image: {}x{} {} needs {} data bytes, found {}", h.width, h.height,
                                 h.magic, need, bytes.size() - h.data_offset));
  const unsigned char* d = bytes.data() + h.data_offset;
  auto sample = [&](std::size_t idx) -> double {
    if (sample_bytes == 1) return d[idx];
    return (d[2 * idx] << 8) | d[2 * idx + 1];
  };
  GrayImage img(h.height, h.width);
  std::size_t idx = 0;
  for (int r = 0; r < h.height; ++r)
    for (int c = 0; c < h.width; ++c) {
      double v;
      if (channels == 1) {
        v = sample(idx++);
      } else {
        v = 0.299 * sample(idx) + 0.587 * sample(idx + 1) + 0.114 * sample(idx + 2);
        idx += 3;
      }
      img(r, c) = std::clamp(v / h.maxval, 0.0, 1.0);
    }
  return img;
}

GrayImage load_gray_image(const std::filesystem::path& path) {
  try {
    return parse_gray_image(read_file_bytes(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_gray_image(const GrayImage& img, const std::filesystem::path& path) {
  std::string out = fmt::format("P5\n{} {}\n255\n", img.cols(), img.rows());
  for (double v : img.values())
    out.push_back(static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  write_bytes(path, out.data(), out.size());
}

PanoramaScaling write_panorama(const Grid<double>& values, const std::filesystem::path& path) {
  PanoramaScaling s;
  if (!values.empty()) {
    const auto [lo, hi] = std::minmax_element(values.values().begin(), values.values().end());
    s.offset = *lo;
    if (*hi > *lo) s.step = (*hi - *lo) / 65535.0;
  }
  std::string out = fmt::format("P5\n# edgecal-scale {} {}\n{} {}\n65535\n", format_double(s.offset),
                                format_double(s.step), values.cols(), values.rows());
  for (double v : values.values()) {
    const auto level = static_cast<std::uint16_t>(
        std::clamp<long>(std::lround((v - s.offset) / s.step), 0L, 65535L));
    out.push_back(static_cast<char>(level >> 8));
    out.push_back(static_cast<char>(level & 0xff));
  }
  write_bytes(path, out.data(), out.size());
  return s;
}

Grid<double> load_panorama(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = read_file_bytes(path);
  const NetpbmHeader h = parse_netpbm_header(bytes);
  if (h.magic != "P5") throw ParseError(path.string() + ": panorama must be P5");
  PanoramaScaling s;
  bool found = false;
  for (const std::string& c : h.comments) {
    std::istringstream in(c);
    std::string tag;
    if (in >> tag && tag == "edgecal-scale") {
      if (!(in >> s.offset >> s.step)) throw ParseError(path.string() + ": malformed scale comment");
      found = true;
    }
  }
  if (!found) throw ParseError(path.string() + ": missing edgecal-scale comment");
  const GrayImage unit = parse_gray_image(bytes);
  Grid<double> out(unit.rows(), unit.cols());
  for (int r = 0; r < unit.rows(); ++r)
    for (int c = 0; c < unit.cols(); ++c)
      out(r, c) = s.offset + std::round(unit(r, c) * h.maxval) * s.step;
  return out;
}

// ---------------------------------------------------------------- calib

namespace {

std::vector<double> parse_values(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string tok;
  while (in >> tok) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(v))
      throw ParseError("calib: key '" + key + "' has a malformed number '" + tok + "'");
    out.push_back(v);
  }
  return out;
}

const std::vector<double>* first_of(const std::map<std::string, std::vector<double>>& m,
                                    std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (auto it = m.find(k); it != m.end()) return &it->second;
  return nullptr;
}

void expect_count(const char* key, const std::vector<double>& v, std::size_t n) {
  if (v.size() != n)
    throw ParseError(fmt::format("calib: key '{}' expects {} values, got {}", key, n, v.size()));
}

}  // namespace

CalibRecord parse_calib(const std::string& text) {
  std::map<std::string, std::vector<double>> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos)
      throw ParseError(fmt::format("calib line {}: expected 'key: values'", line_no));
    std::string key = line.substr(0, colon);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    if (key == "calib_time") continue;  // KITTI timestamp line
    entries[key] = parse_values(key, line.substr(colon + 1));
  }

  CalibRecord rec;
  const auto* p = first_of(entries, {"P2", "P_rect_02", "P"});
  if (!p) throw ParseError("calib: missing key 'P' (or 'P2' / 'P_rect_02')");
  expect_count("P", *p, 12);
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) rec.projection(r, c) = (*p)[static_cast<std::size_t>(4 * r + c)];

  if (const auto* s = first_of(entries, {"S_rect_02", "S"})) {
    expect_count("S", *s, 2);
    rec.image_size = std::pair<int, int>{static_cast<int>(std::lround((*s)[0])),
                                         static_cast<int>(std::lround((*s)[1]))};
  }

  const auto* rot = first_of(entries, {"R"});
  const auto* tr = first_of(entries, {"T"});
  if (const auto* t34 = first_of(entries, {"Tr_velo_to_cam", "Tr"})) {
    expect_count("Tr", *t34, 12);
    Eigen::Matrix3d rm;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) rm(r, c) = (*t34)[static_cast<std::size_t>(4 * r + c)];
    const Eigen::Vector3d a = angles_from_rotation(rm);
    rec.extrinsics = ExtrinsicParams{a.x(), a.y(), a.z(), (*t34)[3], (*t34)[7], (*t34)[11]};
  } else if (rot || tr) {
    if (!rot) throw ParseError("calib: key 'T' present without key 'R'");
    if (!tr) throw ParseError("calib: key 'R' present without key 'T'");
    expect_count("R", *rot, 9);
    expect_count("T", *tr, 3);
    Eigen::Matrix3d rm;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) rm(r, c) = (*rot)[static_cast<std::size_t>(3 * r + c)];
    if (!(rm.transpose() * rm).isApprox(Eigen::Matrix3d::Identity(), 1e-5) || rm.determinant() < 0)
      throw ParseError("calib: key 'R' is not a rotation matrix");
    const Eigen::Vector3d a = angles_from_rotation(rm);
    rec.extrinsics = ExtrinsicParams{a.x(), a.y(), a.z(), (*tr)[0], (*tr)[1], (*tr)[2]};
  }
  return rec;
}

CalibRecord load_calib(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = read_file_bytes(path);
  try {
    return parse_calib(std::string(bytes.begin(), bytes.end()));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

CameraIntrinsics CalibRecord::intrinsics_for(int width, int height) const {
  if (image_size && (image_size->first != width || image_size->second != height))
    throw InvalidArgument(fmt::format("image is {}x{} but calib says {}x{}", width, height,
                                      image_size->first, image_size->second));
  CameraIntrinsics k;
  k.projection = projection;
  k.width = width;
  k.height = height;
  k.validate();
  return k;
}

void write_calib(const CalibRecord& record, const std::filesystem::path& path) {
  std::string out = "P:";
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 4; ++c) out += " " + format_double(record.projection(r, c));
  out += "\n";
  if (record.image_size)
    out += fmt::format("S: {} {}\n", record.image_size->first, record.image_size->second);
  if (record.extrinsics) {
    const Eigen::Matrix3d rm = record.extrinsics->rotation();
    out += "R:";
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) out += " " + format_double(rm(r, c));
    const Eigen::Vector3d t = record.extrinsics->translation();
    out += fmt::format("\nT: {} {} {}\n", format_double(t.x()), format_double(t.y()),
                       format_double(t.z()));
  }
  write_text_file(out, path);
}

// ---------------------------------------------------------------- results

namespace {

constexpr std::array<const char*, 6> kParams = {"rx", "ry", "rz", "tx", "ty", "tz"};

void put(std::string& out, std::string_view key, const std::string& value) {
  out += fmt::format("{} = {}\n", key, value);
}

void put_theta(std::string& out, std::string_view prefix, const Vector6& v) {
  for (std::size_t i = 0; i < 6; ++i)
    put(out, fmt::format("{}.{}", prefix, kParams[i]), format_double(v[static_cast<int>(i)]));
}

void put_cost(std::string& out, std::string_view prefix, const CostBreakdown& c) {
  put(out, fmt::format("{}.J", prefix), format_double(c.value));
  put(out, fmt::format("{}.matched", prefix), std::to_string(c.matched));
  put(out, fmt::format("{}.edge_count", prefix), std::to_string(c.edge_count));
  put(out, fmt::format("{}.precision", prefix), format_double(c.precision));
  put(out, fmt::format("{}.raw_sum", prefix), format_double(c.raw_sum));
}

}  // namespace

std::string result_to_text(const CalibrationResult& r) {
  std::string out = "# edgecal calibration result\n";
  put(out, "frame_id", r.frame_id);
  put(out, "termination", std::string(termination_name(r.trace.termination)));
  put(out, "iterations", std::to_string(r.iterations()));
  put_theta(out, "theta", r.theta.to_vector());
  put_cost(out, "cost", r.final_cost);
  put_theta(out, "theta0", r.theta0.to_vector());
  put_cost(out, "initial_cost", r.initial_cost);
  put(out, "cloud_points", std::to_string(r.cloud_points));
  put(out, "occluded_removed", std::to_string(r.occluded_removed));
  if (r.truth) {
    put_theta(out, "truth", r.truth->to_vector());
    Vector6 err = r.theta.to_vector() - r.truth->to_vector();
    for (int i = 0; i < 3; ++i) err[i] = wrap_angle(err[i]);
    put_theta(out, "error", err);
  }
  put(out, "seed", std::to_string(r.config.seed));
  put(out, "ransac.seed", std::to_string(r.config.ransac_seed));
  out += "# configuration snapshot\n";
  std::istringstream cfg(config_to_text(r.config));
  std::string line;
  while (std::getline(cfg, line)) {
    if (line.empty() || line[0] == '#') continue;
    out += "config." + line + "\n";
  }
  out += "# trace: k J gradient_norm step rx ry rz tx ty tz\n";
  for (std::size_t k = 0; k < r.trace.entries.size(); ++k) {
    const TraceEntry& e = r.trace.entries[k];
    std::string row = fmt::format("trace.{} = {} {} {}", k, format_double(e.cost),
                                  format_double(e.gradient_norm), format_double(e.step));
    for (int i = 0; i < 6; ++i) row += " " + format_double(e.theta[i]);
    out += row + "\n";
  }
  return out;
}

void write_result(const CalibrationResult& result, const std::filesystem::path& path) {
  write_text_file(result_to_text(result), path);
}

std::string report_to_text(const MultiFrameReport& r) {
  std::string out = "# edgecal multi-frame report\n";
  put(out, "frames", std::to_string(r.estimates.size()));
  put_theta(out, "truth", r.truth.to_vector());
  put_theta(out, "mean", r.mean);
  put_theta(out, "signed_mean_error", r.signed_mean_error);
  put_theta(out, "mae", r.mae);
  put_theta(out, "residual.min", r.residual_quartiles.min);
  put_theta(out, "residual.q1", r.residual_quartiles.q1);
  put_theta(out, "residual.median", r.residual_quartiles.median);
  put_theta(out, "residual.q3", r.residual_quartiles.q3);
  put_theta(out, "residual.max", r.residual_quartiles.max);
  out += "# per frame: id termination rx ry rz tx ty tz | residual rx ry rz tx ty tz\n";
  for (std::size_t i = 0; i < r.estimates.size(); ++i) {
    std::string row = fmt::format("frame.{} = {} {}", i, r.frame_ids[i],
                                  termination_name(r.terminations[i]));
    for (int k = 0; k < 6; ++k) row += " " + format_double(r.estimates[i][k]);
    row += " |";
    for (int k = 0; k < 6; ++k) row += " " + format_double(r.residuals[i][k]);
    out += row + "\n";
  }
  return out;
}

void write_report(const MultiFrameReport& report, const std::filesystem::path& path) {
  write_text_file(report_to_text(report), path);
}

}  // namespace edgecal
