#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "edgecal/errors.hpp"

namespace edgecal {

// Dense row-major 2D field. Rows index the vertical axis (image v / panorama j),
// columns the horizontal axis (image u / panorama i).
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{}) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0) throw InvalidArgument("Grid: negative dimensions");
    data_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int r, int c) { return data_[index(r, c)]; }
  const T& operator()(int r, int c) const { return data_[index(r, c)]; }

  // Replicate-border access.
  const T& clamped(int r, int c) const {
    return (*this)(std::clamp(r, 0, rows_ - 1), std::clamp(c, 0, cols_ - 1));
  }

  bool contains(int r, int c) const { return r >= 0 && r < rows_ && c >= 0 && c < cols_; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  template <typename U>
  bool same_shape(const Grid<U>& other) const {
    return rows_ == other.rows() && cols_ == other.cols();
  }

  Grid transposed() const {
    Grid out(cols_, rows_);
    for (int r = 0; r < rows_; ++r)
      for (int c = 0; c < cols_; ++c) out(c, r) = (*this)(r, c);
    return out;
  }

  bool operator==(const Grid& other) const = default;

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

// Camera intensities in [0,1].
using GrayImage = Grid<double>;
// Non-negative edge strengths or edge probabilities.
using EdgeMap = Grid<double>;
// 0/1 masks (Canny output, morphology operands, occupancy).
using BinaryMap = Grid<std::uint8_t>;

}  // namespace edgecal
