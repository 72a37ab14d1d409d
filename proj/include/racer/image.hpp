#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "racer/errors.hpp"

namespace racer {

/// Integer pixel position; `row` indexes the slow axis.
struct PixelCoord {
  int row = 0;
  int col = 0;

  friend constexpr bool operator==(const PixelCoord&, const PixelCoord&) = default;
  friend constexpr auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

inline std::string to_string(const PixelCoord& p) {
  return "(" + std::to_string(p.row) + ", " + std::to_string(p.col) + ")";
}

struct Extent {
  int height = 0;
  int width = 0;

  constexpr bool contains(const PixelCoord& p) const noexcept {
    return p.row >= 0 && p.row < height && p.col >= 0 && p.col < width;
  }
  constexpr std::size_t size() const noexcept {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  /// Pixel at the intersection of the central row and column.
  constexpr PixelCoord origin() const noexcept { return {height / 2, width / 2}; }

  friend constexpr bool operator==(const Extent&, const Extent&) = default;
};

/// Closed axis-aligned block of pixels [row0, row1] x [col0, col1].
struct PixelRect {
  int row0 = 0;
  int row1 = -1;
  int col0 = 0;
  int col1 = -1;

  constexpr bool empty() const noexcept { return row1 < row0 || col1 < col0; }
  constexpr int rows() const noexcept { return empty() ? 0 : row1 - row0 + 1; }
  constexpr int cols() const noexcept { return empty() ? 0 : col1 - col0 + 1; }
  constexpr std::size_t size() const noexcept {
    return static_cast<std::size_t>(rows()) * static_cast<std::size_t>(cols());
  }
  constexpr bool contains(const PixelCoord& p) const noexcept {
    return p.row >= row0 && p.row <= row1 && p.col >= col0 && p.col <= col1;
  }
  /// Row-major member at position `i`.
  constexpr PixelCoord at(std::size_t i) const noexcept {
    const auto c = static_cast<std::size_t>(cols());
    return {row0 + static_cast<int>(i / c), col0 + static_cast<int>(i % c)};
  }
  constexpr std::size_t index_of(const PixelCoord& p) const noexcept {
    return static_cast<std::size_t>(p.row - row0) * static_cast<std::size_t>(cols()) +
           static_cast<std::size_t>(p.col - col0);
  }

  friend constexpr bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Dense row-major 2-D array of intensities.
template <typename T>
class BasicImage {
 public:
  using value_type = T;

  BasicImage() = default;
  BasicImage(int height, int width, T fill = T{}) : extent_{height, width} {
    if (height < 1 || width < 1) {
      throw DomainError("image extent must be at least 1x1, got " + std::to_string(height) +
                        "x" + std::to_string(width));
    }
    data_.assign(extent_.size(), fill);
  }
  BasicImage(int height, int width, std::vector<T> values) : BasicImage(height, width) {
    if (values.size() != extent_.size()) {
      throw DomainError("value count " + std::to_string(values.size()) +
                        " does not match extent " + std::to_string(height) + "x" +
                        std::to_string(width));
    }
    data_ = std::move(values);
  }
  /// Builds from nested rows; all rows must have equal length.
  static BasicImage from_rows(const std::vector<std::vector<T>>& rows) {
    if (rows.empty() || rows.front().empty()) throw DomainError("empty image");
    BasicImage img(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (int r = 0; r < img.height(); ++r) {
      if (rows[r].size() != static_cast<std::size_t>(img.width())) {
        throw DomainError("ragged rows");
      }
      std::copy(rows[r].begin(), rows[r].end(), img.data_.begin() + r * img.width());
    }
    return img;
  }

  int height() const noexcept { return extent_.height; }
  int width() const noexcept { return extent_.width; }
  Extent extent() const noexcept { return extent_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(int row, int col) noexcept {
    return data_[static_cast<std::size_t>(row) * extent_.width + col];
  }
  const T& operator()(int row, int col) const noexcept {
    return data_[static_cast<std::size_t>(row) * extent_.width + col];
  }
  T& operator[](const PixelCoord& p) noexcept { return (*this)(p.row, p.col); }
  const T& operator[](const PixelCoord& p) const noexcept { return (*this)(p.row, p.col); }

  /// Bounds-checked access.
  const T& at(const PixelCoord& p) const {
    if (!extent_.contains(p)) throw DomainError("pixel " + to_string(p) + " outside image");
    return (*this)[p];
  }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }

  T sum() const { return std::accumulate(data_.begin(), data_.end(), T{}); }
  T min() const { return *std::min_element(data_.begin(), data_.end()); }
  T max() const { return *std::max_element(data_.begin(), data_.end()); }

  /// Copy of the block `rect`, which must lie inside the image.
  BasicImage crop(const PixelRect& rect) const {
    if (rect.empty() || !extent_.contains({rect.row0, rect.col0}) ||
        !extent_.contains({rect.row1, rect.col1})) {
      throw DomainError("crop rectangle outside image");
    }
    BasicImage out(rect.rows(), rect.cols());
    for (int r = 0; r < out.height(); ++r) {
      for (int c = 0; c < out.width(); ++c) out(r, c) = (*this)(rect.row0 + r, rect.col0 + c);
    }
    return out;
  }

  friend bool operator==(const BasicImage&, const BasicImage&) = default;

 private:
  Extent extent_{};
  std::vector<T> data_;
};

using ImageGrid = BasicImage<double>;

/// Integer translation with zero fill: out(p + shift) = in(p).
template <typename T>
BasicImage<T> shift_image(const BasicImage<T>& in, int drow, int dcol) {
  BasicImage<T> out(in.height(), in.width(), T{});
  for (int r = 0; r < in.height(); ++r) {
    const int rr = r + drow;
    if (rr < 0 || rr >= in.height()) continue;
    for (int c = 0; c < in.width(); ++c) {
      const int cc = c + dcol;
      if (cc < 0 || cc >= in.width()) continue;
      out(rr, cc) = in(r, c);
    }
  }
  return out;
}

}  // namespace racer
