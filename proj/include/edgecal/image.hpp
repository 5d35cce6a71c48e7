#pragma once

#include <optional>

#include <Eigen/Core>

#include "edgecal/grid.hpp"

namespace edgecal {

// Cumulative-distribution remap over `bins` equal-width bins on [0,1]. Each
// pixel becomes the fraction of pixels whose bin is <= its own bin.
GrayImage histogram_equalize(const GrayImage& img, int bins = 256);

struct Gradients {
  Grid<double> gx;  // along columns
  Grid<double> gy;  // along rows
};

// Unnormalized 3x3 Sobel pair with replicated borders.
Gradients sobel_gradients(const Grid<double>& img);
// Per-pixel sqrt(gx^2 + gy^2). A unit step yields magnitude 4 next to it.
EdgeMap sobel_edges(const Grid<double>& img);

// Separable Gaussian, radius ceil(3 sigma), kernel normalized to unit sum,
// replicated borders.
Grid<double> gaussian_blur(const Grid<double>& map, double sigma);

// Equalize -> Sobel -> Gaussian -> rescale to max 1 (all-zero stays zero).
EdgeMap camera_edge_map(const GrayImage& img, double sigma, int bins = 256);

// Binary Canny edges. Thresholds are fractions of the maximum gradient
// magnitude after smoothing.
BinaryMap canny(const Grid<double>& img, double sigma, double low, double high);

// Flat square structuring element of side 2r+1, clipped at the grid border.
BinaryMap dilate(const BinaryMap& map, int radius);
BinaryMap erode(const BinaryMap& map, int radius);
// erode(dilate(map)).
BinaryMap close(const BinaryMap& map, int radius);

// u = (column, row) in continuous pixel coordinates. Returns nullopt outside
// [0, cols-1] x [0, rows-1].
std::optional<double> bilinear_sample(const Grid<double>& map, const Eigen::Vector2d& u);

}  // namespace edgecal
