#include "edgecal/synth.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "edgecal/config.hpp"
#include "edgecal/errors.hpp"

namespace edgecal::synth {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDeg = kPi / 180.0;
constexpr double kEps = 1e-9;

Eigen::Matrix3d yaw_matrix(double yaw) {
  const double c = std::cos(yaw), s = std::sin(yaw);
  Eigen::Matrix3d r;
  r << c, -s, 0, s, c, 0, 0, 0, 1;
  return r;
}

std::optional<Hit> hit_box(const BoxObject& box, const Eigen::Vector3d& origin,
                           const Eigen::Vector3d& dir) {
  const Eigen::Matrix3d to_local = yaw_matrix(box.yaw).transpose();
  const Eigen::Vector3d o = to_local * (origin - box.center);
  const Eigen::Vector3d d = to_local * dir;
  const Eigen::Vector3d half = 0.5 * box.size;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int face = -1;
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-15) {
      if (std::abs(o[a]) > half[a]) return std::nullopt;
      continue;
    }
    double t1 = (-half[a] - o[a]) / d[a];
    double t2 = (half[a] - o[a]) / d[a];
    // Entering through the +a face when travelling towards -a.
    int enter_face = d[a] < 0 ? 2 * a : 2 * a + 1;
    if (t1 > t2) std::swap(t1, t2);
    if (t1 > t_near) {
      t_near = t1;
      face = enter_face;
    }
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return std::nullopt;
  }
  if (face < 0 || !(t_near > kEps)) return std::nullopt;
  return Hit{t_near, box.faces[static_cast<std::size_t>(face)], origin + t_near * dir, false};
}

std::optional<Hit> hit_cylinder(const CylinderObject& cyl, const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& dir) {
  const double ox = origin.x() - cyl.base.x(), oy = origin.y() - cyl.base.y();
  const double top_z = cyl.base.z() + cyl.height;
  std::optional<Hit> best;
  const double a = dir.x() * dir.x() + dir.y() * dir.y();
  if (a > 0.0) {
    const double b = 2.0 * (ox * dir.x() + oy * dir.y());
    const double c = ox * ox + oy * oy - cyl.radius * cyl.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc >= 0.0 && c > 0.0) {
      const double t = (-b - std::sqrt(disc)) / (2.0 * a);
      const double z = origin.z() + t * dir.z();
      if (t > kEps && z >= cyl.base.z() && z <= top_z)
        best = Hit{t, cyl.side, origin + t * dir, false};
    }
  }
  if (dir.z() < 0.0 && origin.z() > top_z) {
    const double t = (top_z - origin.z()) / dir.z();
    const double x = ox + t * dir.x(), y = oy + t * dir.y();
    if (t > kEps && x * x + y * y <= cyl.radius * cyl.radius && (!best || t < best->distance))
      best = Hit{t, cyl.top, origin + t * dir, false};
  }
  return best;
}

}  // namespace

std::vector<double> LidarModel::ring_elevations() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(rings));
  for (int k = 0; k < rings; ++k) {
    const double f = rings > 1 ? static_cast<double>(k) / (rings - 1) : 0.0;
    out.push_back((elevation_min_deg + f * (elevation_max_deg - elevation_min_deg)) * kDeg);
  }
  return out;
}

void SceneSpec::validate() const {
  if (boxes.empty() && cylinders.empty()) throw InvalidArgument("scene: at least one object");
  if (lidar.rings < 1) throw InvalidArgument("scene: lidar.rings must be >= 1");
  if (!(lidar.azimuth_step_deg > 0.0)) throw InvalidArgument("scene: azimuth step must be > 0");
  if (!(lidar.max_range > 0.0)) throw InvalidArgument("scene: max range must be > 0");
  if (!(lidar.noise_sigma >= 0.0)) throw InvalidArgument("scene: noise sigma must be >= 0");
  if (!(lidar.elevation_max_deg >= lidar.elevation_min_deg))
    throw InvalidArgument("scene: lidar elevation range is inverted");
  if (supersample < 1) throw InvalidArgument("scene: supersample must be >= 1");
  camera.validate();
  for (double a : {truth.rx, truth.ry, truth.rz})
    if (!(a > -kPi && a <= kPi)) throw InvalidArgument("scene: truth angle outside (-pi, pi]");
  for (const BoxObject& b : boxes)
    if (std::hypot(b.center.x(), b.center.y()) > lidar.max_range)
      throw InvalidArgument("scene: box beyond lidar range");
  for (const CylinderObject& c : cylinders)
    if (std::hypot(c.base.x(), c.base.y()) > lidar.max_range)
      throw InvalidArgument("scene: cylinder beyond lidar range");
}

std::optional<Hit> cast_ray(const SceneSpec& scene, const Eigen::Vector3d& origin,
                            const Eigen::Vector3d& dir, bool include_ground) {
  std::optional<Hit> best;
  auto consider = [&best](const std::optional<Hit>& h) {
    if (h && (!best || h->distance < best->distance)) best = h;
  };
  for (const BoxObject& b : scene.boxes) consider(hit_box(b, origin, dir));
  for (const CylinderObject& c : scene.cylinders) consider(hit_cylinder(c, origin, dir));
  if (include_ground && dir.z() < 0.0 && origin.z() > scene.ground_z) {
    const double t = (scene.ground_z - origin.z()) / dir.z();
    if (t > kEps) consider(Hit{t, scene.ground, origin + t * dir, true});
  }
  return best;
}

std::vector<Point3> render_lidar(const SceneSpec& scene) {
  std::mt19937_64 rng(scene.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::vector<double> rings = scene.lidar.ring_elevations();
  const int steps = static_cast<int>(std::lround(360.0 / scene.lidar.azimuth_step_deg));
  const double step = scene.lidar.azimuth_step_deg * kDeg;
  std::vector<Point3> cloud;
  const Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  for (double el : rings) {
    for (int m = 0; m < steps; ++m) {
      const double az = -kPi + m * step;
      const Eigen::Vector3d dir(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az),
                                std::sin(el));
      const std::optional<Hit> hit = cast_ray(scene, origin, dir);
      // One draw per ray keeps the noise sequence independent of scene content.
      // Tails are clipped at 4 sigma.
      const double n = scene.lidar.noise_sigma * std::clamp(noise(rng), -4.0, 4.0);
      if (!hit || hit->distance > scene.lidar.max_range) continue;
      const double range = std::max(hit->distance + n, 1e-3);
      const Eigen::Vector3d p = range * dir;
      cloud.push_back({p.x(), p.y(), p.z(), std::clamp(hit->material.reflectivity, 0.0, 1.0)});
    }
  }
  return cloud;
}

GrayImage render_camera(const SceneSpec& scene) {
  const CameraIntrinsics& k = scene.camera;
  const Eigen::Matrix3d k3_inv = k.projection.leftCols<3>().inverse();
  const Eigen::Vector3d cam_origin = -k3_inv * k.projection.col(3);
  const Eigen::Matrix3d r = scene.truth.rotation();
  const Eigen::Vector3d t = scene.truth.translation();
  // Camera frame -> LiDAR frame.
  const Eigen::Matrix3d r_inv = r.transpose();
  const Eigen::Vector3d origin = r_inv * (cam_origin - t);

  GrayImage img(k.height, k.width);
  const int s = scene.supersample;
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      double acc = 0.0;
      for (int sv = 0; sv < s; ++sv)
        for (int su = 0; su < s; ++su) {
          const double pu = u + (su + 0.5) / s - 0.5;
          const double pv = v + (sv + 0.5) / s - 0.5;
          const Eigen::Vector3d dir = r_inv * (k3_inv * Eigen::Vector3d(pu, pv, 1.0));
          const std::optional<Hit> hit = cast_ray(scene, origin, dir);
          double albedo = scene.sky_albedo;
          if (hit) {
            albedo = hit->material.albedo;
            if (hit->ground)
              for (const ShadowRegion& sh : scene.shadows)
                if (hit->point.x() >= sh.x_min && hit->point.x() <= sh.x_max &&
                    hit->point.y() >= sh.y_min && hit->point.y() <= sh.y_max) {
                  albedo *= sh.factor;
                  break;
                }
          }
          acc += albedo;
        }
      img(v, u) = std::clamp(acc / (s * s), 0.0, 1.0);
    }
  }
  return img;
}

ExtrinsicParams perturb(const ExtrinsicParams& theta, const Vector6& magnitudes,
                        std::uint64_t seed) {
  if (!(magnitudes.array() >= 0.0).all())
    throw InvalidArgument("perturb: magnitudes must be non-negative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Vector6 v = theta.to_vector();
  for (int i = 0; i < 6; ++i) {
    const double draw = unit(rng);
    if (magnitudes[i] > 0.0) v[i] += magnitudes[i] * draw;
  }
  return ExtrinsicParams::from_vector(v);
}

namespace {

struct Footprint {
  Eigen::Vector2d center;
  double radius;
};

class LayoutSampler {
 public:
  LayoutSampler(double look_azimuth, std::uint64_t seed) : look_(look_azimuth), rng_(seed) {}

  double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng_); }
  int count(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng_); }

  // Polar placement relative to the camera look direction; rejects overlaps.
  std::optional<Eigen::Vector2d> place(double r_min, double r_max, double half_fov, double radius) {
    for (int attempt = 0; attempt < 60; ++attempt) {
      const double range = uniform(r_min, r_max);
      const double bearing = look_ + uniform(-half_fov, half_fov);
      const Eigen::Vector2d c(range * std::cos(bearing), range * std::sin(bearing));
      bool clear = true;
      for (const Footprint& f : taken_)
        if ((f.center - c).norm() < f.radius + radius + 0.6) clear = false;
      if (!clear) continue;
      taken_.push_back({c, radius});
      return c;
    }
    return std::nullopt;
  }

  std::optional<Eigen::Vector2d> place_at(const Eigen::Vector2d& c, double radius) {
    for (const Footprint& f : taken_)
      if ((f.center - c).norm() < f.radius + radius + 0.6) return std::nullopt;
    taken_.push_back({c, radius});
    return c;
  }

  double look() const { return look_; }

 private:
  double look_;
  std::mt19937_64 rng_;
  std::vector<Footprint> taken_;
};

Material random_material(LayoutSampler& s, double a_lo, double a_hi, double r_lo, double r_hi) {
  return {s.uniform(a_lo, a_hi), s.uniform(r_lo, r_hi)};
}

}  // namespace

SceneSpec randomize_layout(const SceneSpec& base, std::uint64_t layout_seed, LayoutStyle style) {
  SceneSpec scene = base;
  scene.boxes.clear();
  scene.cylinders.clear();
  scene.shadows.clear();
  const Eigen::Vector3d look = base.truth.rotation().row(2).transpose();
  LayoutSampler s(std::atan2(look.y(), look.x()), layout_seed);
  const double gz = base.ground_z;
  const double half_fov = 34.0 * kDeg;
  const bool cluttered = style == LayoutStyle::kCluttered;
  const bool sparse = style == LayoutStyle::kSparse;

  // Building facades across the back of the view, with gaps between them.
  for (double offset : {-36.0, -13.0, 10.0, 33.0}) {
    if (sparse && s.uniform(0.0, 1.0) < 0.4) continue;
    const double range = s.uniform(26.0, 40.0);
    const double bearing = s.look() + (offset + s.uniform(-3.0, 3.0)) * kDeg;
    const double width = 2.0 * range * std::tan(s.uniform(7.0, 10.0) * kDeg);
    BoxObject b;
    b.center = {range * std::cos(bearing), range * std::sin(bearing), 0.0};
    b.size = {6.0, width, s.uniform(7.0, 14.0)};
    b.center.z() = gz + 0.5 * b.size.z();
    b.yaw = bearing + s.uniform(-0.3, 0.3);
    b.faces.fill(random_material(s, 0.35, 0.85, 0.08, 0.35));
    scene.boxes.push_back(b);
  }
  auto count = [&](int lo, int hi) {
    if (cluttered) return s.count(lo + 2, hi + 3);
    if (sparse) return s.count(std::max(lo - 1, 0), std::max(lo, 1));
    return s.count(lo, hi);
  };
  const double near_max = cluttered ? 13.0 : 17.0;
  // Cars.
  for (int i = 0, n = count(3, 5); i < n; ++i) {
    const auto c = s.place(6.5, near_max, half_fov, 2.3);
    if (!c) continue;
    BoxObject b;
    b.size = {4.2, 1.8, s.uniform(1.4, 1.7)};
    b.center = {c->x(), c->y(), gz + 0.5 * b.size.z()};
    b.yaw = s.uniform(-kPi, kPi);
    b.faces.fill(random_material(s, 0.05, 0.7, 0.05, 0.5));
    b.faces[0] = random_material(s, 0.05, 0.7, 0.05, 0.6);  // front
    b.faces[4] = random_material(s, 0.05, 0.5, 0.05, 0.3);  // roof
    scene.boxes.push_back(b);
  }
  // Low walls and bins.
  for (int i = 0, n = count(1, 3); i < n; ++i) {
    const auto c = s.place(6.0, near_max, half_fov, 1.2);
    if (!c) continue;
    BoxObject b;
    b.size = {s.uniform(0.5, 1.0), s.uniform(0.8, 2.2), s.uniform(0.7, 1.2)};
    b.center = {c->x(), c->y(), gz + 0.5 * b.size.z()};
    b.yaw = s.uniform(-kPi, kPi);
    b.faces.fill(random_material(s, 0.1, 0.9, 0.05, 0.7));
    scene.boxes.push_back(b);
  }
  // Poles.
  for (int i = 0, n = count(3, 5); i < n; ++i) {
    const auto c = s.place(5.0, near_max, half_fov, 0.3);
    if (!c) continue;
    CylinderObject p;
    p.base = {c->x(), c->y(), gz};
    p.radius = s.uniform(0.12, 0.22);
    p.height = s.uniform(3.5, 6.0);
    p.side = random_material(s, 0.05, 0.4, 0.1, 0.6);
    p.top = p.side;
    scene.cylinders.push_back(p);
  }
  // Street lamps along both sidewalks, near the edges of the view.
  for (double side : {-1.0, 1.0}) {
    for (int i = 0, n = sparse ? 1 : count(1, 2); i < n; ++i) {
      for (int attempt = 0; attempt < 20; ++attempt) {
        const double bearing = s.look() + side * s.uniform(18.0, 36.0) * kDeg;
        const double range = s.uniform(5.0, 10.0);
        const auto c = s.place_at(Eigen::Vector2d(range * std::cos(bearing),
                                                  range * std::sin(bearing)), 0.3);
        if (!c) continue;
        CylinderObject p;
        p.base = {c->x(), c->y(), gz};
        p.radius = s.uniform(0.1, 0.18);
        p.height = s.uniform(4.0, 7.0);
        p.side = random_material(s, 0.05, 0.3, 0.3, 0.7);
        p.top = p.side;
        scene.cylinders.push_back(p);
        break;
      }
    }
  }
  // Pedestrians.
  for (int i = 0, n = count(2, 4); i < n; ++i) {
    const auto c = s.place(5.0, 13.0, half_fov, 0.4);
    if (!c) continue;
    CylinderObject p;
    p.base = {c->x(), c->y(), gz};
    p.radius = 0.3;
    p.height = s.uniform(1.6, 1.85);
    p.side = random_material(s, 0.05, 0.6, 0.05, 0.4);
    p.top = p.side;
    scene.cylinders.push_back(p);
  }
  // Sign boards on posts.
  for (int i = 0, n = count(1, 2); i < n; ++i) {
    const auto c = s.place(6.0, 15.0, half_fov, 0.6);
    if (!c) continue;
    const double yaw = s.look() + kPi + s.uniform(-0.4, 0.4);
    BoxObject board;
    board.size = {0.06, 0.9, 0.7};
    board.center = {c->x(), c->y(), gz + s.uniform(2.2, 2.8)};
    board.yaw = yaw;
    board.faces.fill(random_material(s, 0.6, 0.95, 0.7, 1.0));
    scene.boxes.push_back(board);
    CylinderObject post;
    post.base = {c->x() + 0.1 * std::cos(yaw), c->y() + 0.1 * std::sin(yaw), gz};
    post.radius = 0.05;
    post.height = board.center.z() - 0.5 * board.size.z() - gz;
    post.side = {0.3, 0.3};
    post.top = post.side;
    scene.cylinders.push_back(post);
  }
  // Painted stripe groups on the road.
  for (int i = 0, n = count(1, 2); i < n; ++i) {
    const auto c = s.place(6.0, 14.0, half_fov * 0.8, 3.0);
    if (!c) continue;
    const double yaw = s.uniform(-kPi, kPi);
    const Eigen::Vector2d across(std::cos(yaw + kPi / 2), std::sin(yaw + kPi / 2));
    const int stripes = s.count(3, 6);
    for (int k = 0; k < stripes; ++k) {
      const Eigen::Vector2d p = *c + (k - 0.5 * (stripes - 1)) * 1.0 * across;
      BoxObject m;
      m.size = {3.0, 0.5, 0.02};
      m.center = {p.x(), p.y(), gz + 0.01};
      m.yaw = yaw;
      m.faces.fill({0.95, 0.85});
      scene.boxes.push_back(m);
    }
  }
  if (sparse) {
    for (int i = 0, n = s.count(2, 3); i < n; ++i) {
      const double range = s.uniform(5.0, 14.0);
      const double bearing = s.look() + s.uniform(-half_fov, half_fov);
      const double x = range * std::cos(bearing), y = range * std::sin(bearing);
      const double hx = s.uniform(1.0, 3.0), hy = s.uniform(1.0, 3.0);
      scene.shadows.push_back({x - hx, x + hx, y - hy, y + hy, s.uniform(0.3, 0.5)});
    }
  }
  return scene;
}

namespace {

std::vector<double> parse_numbers(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size() || !std::isfinite(v)) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ParseError("scene: key '" + key + "' has a malformed number '" + tok + "'");
    }
  }
  return out;
}

double single(const std::string& key, const std::vector<double>& v) {
  if (v.size() != 1) throw ParseError("scene: key '" + key + "' expects one value");
  return v[0];
}

}  // namespace

SceneSpec parse_scene(const std::string& text) {
  SceneSpec scene;
  double fx = scene.camera.fx(), fy = scene.camera.fy(), cx = scene.camera.cx(),
         cy = scene.camera.cy();
  int width = scene.camera.width, height = scene.camera.height;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos)
      throw ParseError(fmt::format("scene line {}: expected 'key = value'", line_no));
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    const std::vector<double> v = parse_numbers(key, line.substr(eq + 1));

    if (key == "ground.z") scene.ground_z = single(key, v);
    else if (key == "ground.albedo") scene.ground.albedo = single(key, v);
    else if (key == "ground.reflectivity") scene.ground.reflectivity = single(key, v);
    else if (key == "sky.albedo") scene.sky_albedo = single(key, v);
    else if (key == "lidar.rings") scene.lidar.rings = static_cast<int>(single(key, v));
    else if (key == "lidar.elevation_min_deg") scene.lidar.elevation_min_deg = single(key, v);
    else if (key == "lidar.elevation_max_deg") scene.lidar.elevation_max_deg = single(key, v);
    else if (key == "lidar.azimuth_step_deg") scene.lidar.azimuth_step_deg = single(key, v);
    else if (key == "lidar.max_range") scene.lidar.max_range = single(key, v);
    else if (key == "lidar.noise_sigma") scene.lidar.noise_sigma = single(key, v);
    else if (key == "camera.fx") fx = single(key, v);
    else if (key == "camera.fy") fy = single(key, v);
    else if (key == "camera.cx") cx = single(key, v);
    else if (key == "camera.cy") cy = single(key, v);
    else if (key == "camera.width") width = static_cast<int>(single(key, v));
    else if (key == "camera.height") height = static_cast<int>(single(key, v));
    else if (key == "camera.supersample") scene.supersample = static_cast<int>(single(key, v));
    else if (key == "seed") scene.seed = static_cast<std::uint64_t>(single(key, v));
    else if (key == "truth") {
      if (v.size() != 6) throw ParseError("scene: truth expects 6 values");
      scene.truth = {v[0], v[1], v[2], v[3], v[4], v[5]};
    } else if (key == "box") {
      if (v.size() != 9 && v.size() != 19)
        throw ParseError(fmt::format("scene line {}: box expects 9 or 19 values", line_no));
      BoxObject b;
      b.center = {v[0], v[1], v[2]};
      b.size = {v[3], v[4], v[5]};
      b.yaw = v[6] * kDeg;
      for (std::size_t f = 0; f < 6; ++f)
        b.faces[f] = v.size() == 9 ? Material{v[7], v[8]} : Material{v[7 + f], v[13 + f]};
      scene.boxes.push_back(b);
    } else if (key == "cylinder") {
      if (v.size() != 9)
        throw ParseError(fmt::format("scene line {}: cylinder expects 9 values", line_no));
      scene.cylinders.push_back({{v[0], v[1], v[2]}, v[3], v[4], {v[5], v[6]}, {v[7], v[8]}});
    } else if (key == "shadow") {
      if (v.size() != 5)
        throw ParseError(fmt::format("scene line {}: shadow expects 5 values", line_no));
      scene.shadows.push_back({v[0], v[1], v[2], v[3], v[4]});
    } else {
      throw ParseError(fmt::format("scene line {}: unknown key '{}'", line_no, key));
    }
  }
  scene.camera = CameraIntrinsics::from_pinhole(fx, fy, cx, cy, width, height);
  scene.validate();
  return scene;
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scene(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string scene_to_text(const SceneSpec& scene) {
  auto d = [](double v) { return format_double(v); };
  std::string out;
  out += "ground.z = " + d(scene.ground_z) + "\n";
  out += "ground.albedo = " + d(scene.ground.albedo) + "\n";
  out += "ground.reflectivity = " + d(scene.ground.reflectivity) + "\n";
  out += "sky.albedo = " + d(scene.sky_albedo) + "\n";
  out += "lidar.rings = " + std::to_string(scene.lidar.rings) + "\n";
  out += "lidar.elevation_min_deg = " + d(scene.lidar.elevation_min_deg) + "\n";
  out += "lidar.elevation_max_deg = " + d(scene.lidar.elevation_max_deg) + "\n";
  out += "lidar.azimuth_step_deg = " + d(scene.lidar.azimuth_step_deg) + "\n";
  out += "lidar.max_range = " + d(scene.lidar.max_range) + "\n";
  out += "lidar.noise_sigma = " + d(scene.lidar.noise_sigma) + "\n";
  out += "camera.fx = " + d(scene.camera.fx()) + "\n";
  out += "camera.fy = " + d(scene.camera.fy()) + "\n";
  out += "camera.cx = " + d(scene.camera.cx()) + "\n";
  out += "camera.cy = " + d(scene.camera.cy()) + "\n";
  out += "camera.width = " + std::to_string(scene.camera.width) + "\n";
  out += "camera.height = " + std::to_string(scene.camera.height) + "\n";
  out += "camera.supersample = " + std::to_string(scene.supersample) + "\n";
  out += "seed = " + std::to_string(scene.seed) + "\n";
  const auto& t = scene.truth;
  out += fmt::format("truth = {} {} {} {} {} {}\n", d(t.rx), d(t.ry), d(t.rz), d(t.tx), d(t.ty),
                     d(t.tz));
  for (const BoxObject& b : scene.boxes) {
    out += fmt::format("box = {} {} {}  {} {} {}  {}", d(b.center.x()), d(b.center.y()),
                       d(b.center.z()), d(b.size.x()), d(b.size.y()), d(b.size.z()),
                       d(b.yaw / kDeg));
    out += " ";
    for (const Material& m : b.faces) out += " " + d(m.albedo);
    out += " ";
    for (const Material& m : b.faces) out += " " + d(m.reflectivity);
    out += "\n";
  }
  for (const CylinderObject& c : scene.cylinders)
    out += fmt::format("cylinder = {} {} {}  {} {}  {} {} {} {}\n", d(c.base.x()), d(c.base.y()),
                       d(c.base.z()), d(c.radius), d(c.height), d(c.side.albedo),
                       d(c.side.reflectivity), d(c.top.albedo), d(c.top.reflectivity));
  for (const ShadowRegion& s : scene.shadows)
    out += fmt::format("shadow = {} {} {} {} {}\n", d(s.x_min), d(s.x_max), d(s.y_min),
                       d(s.y_max), d(s.factor));
  return out;
}

}  // namespace edgecal::synth
