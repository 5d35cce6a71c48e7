#include "edgecal/image.hpp"

#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "edgecal/errors.hpp"

namespace edgecal {

GrayImage histogram_equalize(const GrayImage& img, int bins) {
  if (bins < 2) throw InvalidArgument("histogram_equalize: bins must be >= 2");
  auto bin_of = [bins](double v) {
    const int b = static_cast<int>(std::floor(std::clamp(v, 0.0, 1.0) * bins));
    return std::min(b, bins - 1);
  };
  std::vector<std::size_t> hist(static_cast<std::size_t>(bins), 0);
  for (double v : img.values()) ++hist[static_cast<std::size_t>(bin_of(v))];

  std::vector<double> cdf(hist.size());
  const double total = static_cast<double>(img.size());
  std::size_t running = 0;
  for (std::size_t b = 0; b < hist.size(); ++b) {
    running += hist[b];
    cdf[b] = total > 0 ? static_cast<double>(running) / total : 0.0;
  }

  GrayImage out(img.rows(), img.cols());
  auto src = img.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i)
    dst[i] = cdf[static_cast<std::size_t>(bin_of(src[i]))];
  return out;
}

Gradients sobel_gradients(const Grid<double>& img) {
  if (img.rows() < 3 || img.cols() < 3)
    throw InvalidArgument("sobel: image must be at least 3x3");
  Gradients g{Grid<double>(img.rows(), img.cols()), Grid<double>(img.rows(), img.cols())};
  for (int r = 0; r < img.rows(); ++r) {
    for (int c = 0; c < img.cols(); ++c) {
      const double tl = img.clamped(r - 1, c - 1), t = img.clamped(r - 1, c),
                   tr = img.clamped(r - 1, c + 1);
      const double l = img.clamped(r, c - 1), rr = img.clamped(r, c + 1);
      const double bl = img.clamped(r + 1, c - 1), b = img.clamped(r + 1, c),
                   br = img.clamped(r + 1, c + 1);
      g.gx(r, c) = (tr + 2.0 * rr + br) - (tl + 2.0 * l + bl);
      g.gy(r, c) = (bl + 2.0 * b + br) - (tl + 2.0 * t + tr);
    }
  }
  return g;
}

EdgeMap sobel_edges(const Grid<double>& img) {
  const Gradients g = sobel_gradients(img);
  EdgeMap out(img.rows(), img.cols());
  auto gx = g.gx.values();
  auto gy = g.gy.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = std::hypot(gx[i], gy[i]);
  return out;
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  for (int i = -radius; i <= radius; ++i)
    k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * (i * i) / (sigma * sigma));
  const double sum = std::accumulate(k.begin(), k.end(), 0.0);
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

Grid<double> gaussian_blur(const Grid<double>& map, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidArgument("gaussian_blur: sigma must be positive");
  const std::vector<double> k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  if (map.empty()) return map;

  Grid<double> horiz(map.rows(), map.cols());
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d)
        acc += k[static_cast<std::size_t>(d + radius)] * map.clamped(r, c + d);
      horiz(r, c) = acc;
    }
  }
  Grid<double> out(map.rows(), map.cols());
  for (int r = 0; r < map.rows(); ++r) {
    for (int c = 0; c < map.cols(); ++c) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d)
        acc += k[static_cast<std::size_t>(d + radius)] * horiz.clamped(r + d, c);
      out(r, c) = acc;
    }
  }
  return out;
}

EdgeMap camera_edge_map(const GrayImage& img, double sigma, int bins) {
  EdgeMap e = gaussian_blur(sobel_edges(histogram_equalize(img, bins)), sigma);
  double peak = 0.0;
  for (double v : e.values()) peak = std::max(peak, v);
  if (peak > 0.0)
    for (double& v : e.values()) v /= peak;
  return e;
}

BinaryMap canny(const Grid<double>& img, double sigma, double low, double high) {
  if (!(low >= 0.0 && low < high && high <= 1.0))
    throw InvalidArgument("canny: thresholds must satisfy 0 <= low < high <= 1");
  const Grid<double> smooth = gaussian_blur(img, sigma);
  const Gradients g = sobel_gradients(smooth);
  const int rows = img.rows(), cols = img.cols();

  Grid<double> mag(rows, cols);
  double peak = 0.0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      mag(r, c) = std::hypot(g.gx(r, c), g.gy(r, c));
      peak = std::max(peak, mag(r, c));
    }
  BinaryMap edges(rows, cols, 0);
  double level = 0.0;
  for (double v : img.values()) level = std::max(level, std::abs(v));
  // Rounding dust from blurring a flat field is not an edge.
  if (!(peak > 1e-12 * (1.0 + level))) return edges;

  // Non-maximum suppression along the gradient direction quantized to
  // 0/45/90/135 degrees. The forward neighbor wins ties so plateaus of two
  // equal pixels keep exactly one.
  Grid<double> thin(rows, cols, 0.0);
  constexpr double kPi = 3.14159265358979323846;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double m = mag(r, c);
      if (m <= 0.0) continue;
      double angle = std::atan2(g.gy(r, c), g.gx(r, c)) * 180.0 / kPi;
      if (angle < 0) angle += 180.0;
      int dr = 0, dc = 0;
      if (angle < 22.5 || angle >= 157.5) {
        dc = 1;
      } else if (angle < 67.5) {
        dr = 1;
        dc = 1;
      } else if (angle < 112.5) {
        dr = 1;
      } else {
        dr = 1;
        dc = -1;
      }
      const double fwd = mag.clamped(r + dr, c + dc);
      const double back = mag.clamped(r - dr, c - dc);
      const bool fwd_in = mag.contains(r + dr, c + dc);
      const bool back_in = mag.contains(r - dr, c - dc);
      if ((!fwd_in || m >= fwd) && (!back_in || m > back)) thin(r, c) = m;
    }
  }

  const double hi = high * peak;
  const double lo = low * peak;
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      if (thin(r, c) >= hi && thin(r, c) > 0.0) {
        edges(r, c) = 1;
        stack.emplace_back(r, c);
      }
  while (!stack.empty()) {
    const auto [r, c] = stack.back();
    stack.pop_back();
    for (int dr = -1; dr <= 1; ++dr)
      for (int dc = -1; dc <= 1; ++dc) {
        const int nr = r + dr, nc = c + dc;
        if (!edges.contains(nr, nc) || edges(nr, nc)) continue;
        if (thin(nr, nc) >= lo && thin(nr, nc) > 0.0) {
          edges(nr, nc) = 1;
          stack.emplace_back(nr, nc);
        }
      }
  }
  return edges;
}

namespace {

// Running max/min over a clipped 1D window, applied separably.
template <bool kMax>
BinaryMap morph(const BinaryMap& map, int radius) {
  if (radius < 1) throw InvalidArgument("morphology: kernel radius must be >= 1");
  const int rows = map.rows(), cols = map.cols();
  BinaryMap tmp(rows, cols), out(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      std::uint8_t v = kMax ? 0 : 1;
      for (int d = std::max(0, c - radius); d <= std::min(cols - 1, c + radius); ++d)
        v = kMax ? std::max(v, map(r, d)) : std::min(v, map(r, d));
      tmp(r, c) = v;
    }
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      std::uint8_t v = kMax ? 0 : 1;
      for (int d = std::max(0, r - radius); d <= std::min(rows - 1, r + radius); ++d)
        v = kMax ? std::max(v, tmp(d, c)) : std::min(v, tmp(d, c));
      out(r, c) = v;
    }
  return out;
}

}  // namespace

BinaryMap dilate(const BinaryMap& map, int radius) { return morph<true>(map, radius); }
BinaryMap erode(const BinaryMap& map, int radius) { return morph<false>(map, radius); }
BinaryMap close(const BinaryMap& map, int radius) { return erode(dilate(map, radius), radius); }

std::optional<double> bilinear_sample(const Grid<double>& map, const Eigen::Vector2d& u) {
  const double x = u.x(), y = u.y();
  if (!(x >= 0.0 && y >= 0.0 && x <= map.cols() - 1 && y <= map.rows() - 1)) return std::nullopt;
  if (map.cols() < 2 || map.rows() < 2) return std::nullopt;
  const int c0 = std::min(static_cast<int>(x), map.cols() - 2);
  const int r0 = std::min(static_cast<int>(y), map.rows() - 2);
  const double fx = x - c0, fy = y - r0;
  const double top = (1.0 - fx) * map(r0, c0) + fx * map(r0, c0 + 1);
  const double bot = (1.0 - fx) * map(r0 + 1, c0) + fx * map(r0 + 1, c0 + 1);
  return (1.0 - fy) * top + fy * bot;
}

}  // namespace edgecal
