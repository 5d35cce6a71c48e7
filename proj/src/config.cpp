#include "edgecal/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "edgecal/errors.hpp"

namespace edgecal {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ParseError("config: key '" + key + "' expects a finite number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, v);
  if (ec != std::errc() || ptr != last)
    throw ParseError("config: key '" + key + "' expects an integer, got '" + text + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), last, v);
  if (ec != std::errc() || ptr != last)
    throw ParseError("config: key '" + key + "' expects a non-negative integer, got '" + text +
                     "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ParseError("config: key '" + key + "' expects true/false, got '" + text + "'");
}

struct Field {
  std::string key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
};

Field real(std::string key, double PipelineConfig::*member) {
  return {std::move(key), [member](const PipelineConfig& c) { return format_double(c.*member); },
          [member](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_double(k, v);
          }};
}

Field integer(std::string key, int PipelineConfig::*member) {
  return {std::move(key), [member](const PipelineConfig& c) { return std::to_string(c.*member); },
          [member](PipelineConfig& c, const std::string& k, const std::string& v) {
            const long long x = parse_integer(k, v);
            if (x < INT32_MIN || x > INT32_MAX) throw ParseError("config: key '" + k + "' out of range");
            c.*member = static_cast<int>(x);
          }};
}

Field unsigned_integer(std::string key, std::uint64_t PipelineConfig::*member) {
  return {std::move(key), [member](const PipelineConfig& c) { return std::to_string(c.*member); },
          [member](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_unsigned(k, v);
          }};
}

Field boolean(std::string key, bool PipelineConfig::*member) {
  return {std::move(key),
          [member](const PipelineConfig& c) { return std::string(c.*member ? "true" : "false"); },
          [member](PipelineConfig& c, const std::string& k, const std::string& v) {
            c.*member = parse_bool(k, v);
          }};
}

Field threshold(std::string key, CannyThresholds PipelineConfig::*group, double CannyThresholds::*member) {
  return {std::move(key),
          [group, member](const PipelineConfig& c) { return format_double((c.*group).*member); },
          [group, member](PipelineConfig& c, const std::string& k, const std::string& v) {
            (c.*group).*member = parse_double(k, v);
          }};
}

const std::vector<Field>& fields() {
  using C = PipelineConfig;
  static const std::vector<Field> table = {
      real("ransac.gamma", &C::ransac_gamma),
      integer("ransac.iterations", &C::ransac_iterations),
      real("ransac.early_exit_ratio", &C::ransac_early_exit_ratio),
      unsigned_integer("ransac.seed", &C::ransac_seed),
      real("dbscan.radius", &C::dbscan_radius),
      integer("dbscan.min_points", &C::dbscan_min_points),
      real("foreground.delta", &C::foreground_delta),
      integer("occlusion.kernel_radius", &C::occlusion_kernel_radius),
      real("panorama.scale", &C::panorama_scale),
      real("panorama.delta_h_deg", &C::panorama_delta_h_deg),
      real("panorama.delta_v_deg", &C::panorama_delta_v_deg),
      real("panorama.elevation_min_deg", &C::panorama_elevation_min_deg),
      real("panorama.elevation_max_deg", &C::panorama_elevation_max_deg),
      real("panorama.pad_deg", &C::panorama_pad_deg),
      boolean("panorama.full_360", &C::panorama_full_360),
      real("tv.lambda", &C::tv_lambda),
      integer("tv.max_iter", &C::tv_max_iter),
      real("tv.tol", &C::tv_tol),
      integer("tv.prox_iter", &C::tv_prox_iter),
      integer("camera.bins", &C::camera_bins),
      real("camera.sigma", &C::camera_sigma),
      integer("camera.coarse_levels", &C::camera_coarse_levels),
      real("canny.sigma", &C::canny_sigma),
      threshold("canny.depth_low", &C::canny_depth, &CannyThresholds::low),
      threshold("canny.depth_high", &C::canny_depth, &CannyThresholds::high),
      threshold("canny.reflectivity_low", &C::canny_reflectivity, &CannyThresholds::low),
      threshold("canny.reflectivity_high", &C::canny_reflectivity, &CannyThresholds::high),
      threshold("canny.object_low", &C::canny_object, &CannyThresholds::low),
      threshold("canny.object_high", &C::canny_object, &CannyThresholds::high),
      real("cost.match_threshold", &C::match_threshold),
      real("opt.delta_rot", &C::opt_delta_rot),
      real("opt.delta_trans", &C::opt_delta_trans),
      real("opt.gamma0", &C::opt_gamma0),
      real("opt.epsilon", &C::opt_epsilon),
      integer("opt.max_iter", &C::opt_max_iter),
      real("opt.max_step", &C::opt_max_step),
      integer("opt.nonmonotone_window", &C::opt_nonmonotone_window),
      real("perturb.rotation", &C::perturb_rotation),
      real("perturb.translation", &C::perturb_translation),
      unsigned_integer("seed", &C::seed),
  };
  return table;
}

void require(bool ok, const char* key, const char* what) {
  if (!ok) throw InvalidArgument(fmt::format("config: {} {}", key, what));
}

}  // namespace

std::string format_double(double v) { return fmt::format("{}", v); }

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.push_back(f.key);
  return keys;
}

void PipelineConfig::validate() const {
  require(ransac_gamma > 0.0, "ransac.gamma", "must be positive");
  require(ransac_iterations >= 1, "ransac.iterations", "must be >= 1");
  require(ransac_early_exit_ratio > 0.0 && ransac_early_exit_ratio <= 1.0,
          "ransac.early_exit_ratio", "must be in (0, 1]");
  require(dbscan_radius > 0.0, "dbscan.radius", "must be positive");
  require(dbscan_min_points >= 1, "dbscan.min_points", "must be >= 1");
  require(foreground_delta > 0.0, "foreground.delta", "must be positive");
  require(occlusion_kernel_radius >= 1, "occlusion.kernel_radius", "must be >= 1");
  require(panorama_scale > 0.0, "panorama.scale", "must be positive");
  require(panorama_delta_h_deg > 0.0, "panorama.delta_h_deg", "must be positive");
  require(panorama_delta_v_deg > 0.0, "panorama.delta_v_deg", "must be positive");
  require(panorama_elevation_max_deg > panorama_elevation_min_deg, "panorama.elevation_max_deg",
          "must exceed panorama.elevation_min_deg");
  require(panorama_pad_deg >= 0.0, "panorama.pad_deg", "must be >= 0");
  require(tv_lambda > 0.0, "tv.lambda", "must be positive");
  require(tv_max_iter >= 1, "tv.max_iter", "must be >= 1");
  require(tv_tol >= 0.0, "tv.tol", "must be >= 0");
  require(tv_prox_iter >= 1, "tv.prox_iter", "must be >= 1");
  require(camera_bins >= 2, "camera.bins", "must be >= 2");
  require(camera_sigma > 0.0, "camera.sigma", "must be positive");
  require(camera_coarse_levels >= 0 && camera_coarse_levels <= 8, "camera.coarse_levels",
          "must be in [0, 8]");
  require(canny_sigma > 0.0, "canny.sigma", "must be positive");
  for (const auto& [name, t] : {std::pair{"canny.depth_*", canny_depth},
                                std::pair{"canny.reflectivity_*", canny_reflectivity},
                                std::pair{"canny.object_*", canny_object}})
    require(t.low >= 0.0 && t.low < t.high && t.high <= 1.0, name,
            "must satisfy 0 <= low < high <= 1");
  require(match_threshold >= 0.0, "cost.match_threshold", "must be >= 0");
  require(opt_delta_rot > 0.0, "opt.delta_rot", "must be positive");
  require(opt_delta_trans > 0.0, "opt.delta_trans", "must be positive");
  require(opt_gamma0 > 0.0, "opt.gamma0", "must be positive");
  require(opt_epsilon > 0.0, "opt.epsilon", "must be positive");
  require(opt_max_iter >= 1, "opt.max_iter", "must be >= 1");
  require(opt_max_step > 0.0, "opt.max_step", "must be positive");
  require(opt_nonmonotone_window >= 0, "opt.nonmonotone_window", "must be >= 0");
  require(perturb_rotation >= 0.0, "perturb.rotation", "must be >= 0");
  require(perturb_translation >= 0.0, "perturb.translation", "must be >= 0");
}

SegmentationOptions PipelineConfig::segmentation_options() const {
  SegmentationOptions o;
  o.ransac = {ransac_gamma, ransac_iterations, ransac_seed, ransac_early_exit_ratio};
  o.dbscan_radius = dbscan_radius;
  o.dbscan_min_points = dbscan_min_points;
  o.foreground_delta = foreground_delta;
  return o;
}

TvOptions PipelineConfig::tv_options() const {
  return {tv_lambda, tv_max_iter, tv_tol, tv_prox_iter};
}

AscentOptions PipelineConfig::ascent_options() const {
  AscentOptions o;
  o.epsilon = opt_epsilon;
  o.max_iter = opt_max_iter;
  o.delta_h << opt_delta_rot, opt_delta_rot, opt_delta_rot, opt_delta_trans, opt_delta_trans,
      opt_delta_trans;
  o.gamma0 = opt_gamma0;
  o.max_step = opt_max_step;
  o.nonmonotone_window = opt_nonmonotone_window;
  return o;
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
  std::map<std::string, const Field*> index;
  for (const Field& f : fields()) index[f.key] = &f;

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(fmt::format("config line {}: expected 'key = value'", line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    auto it = index.find(key);
    if (it == index.end()) {
      std::string valid;
      for (const Field& f : fields()) valid += (valid.empty() ? "" : ", ") + f.key;
      throw ParseError(fmt::format("config line {}: unknown key '{}'; valid keys: {}", line_no,
                                   key, valid));
    }
    it->second->set(base, key, value);
  }
  base.validate();
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string config_to_text(const PipelineConfig& config) {
  std::string out;
  for (const Field& f : fields()) out += f.key + " = " + f.get(config) + "\n";
  return out;
}

void write_config(const PipelineConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config file " + path.string());
  out << config_to_text(config);
  if (!out) throw IoError("failed writing config file " + path.string());
}

}  // namespace edgecal
