#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "lesionkit/errors.hpp"

namespace lesion {

struct Point {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Point&, const Point&) = default;
};

struct PointF {
  double x = 0.0;
  double y = 0.0;
};

using Rgb = std::array<std::uint8_t, 3>;

/// Row-major 8-bit RGB raster.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, Rgb fill = {0, 0, 0});
  /// `interleaved` holds width*height*3 bytes, r,g,b per pixel.
  RasterImage(int width, int height, std::vector<std::uint8_t> interleaved);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const noexcept { return pixel_count() == 0; }

  Rgb at(int x, int y) const noexcept {
    const std::size_t i = index(x, y) * 3;
    return {bytes_[i], bytes_[i + 1], bytes_[i + 2]};
  }
  void set(int x, int y, Rgb c) noexcept {
    const std::size_t i = index(x, y) * 3;
    bytes_[i] = c[0];
    bytes_[i + 1] = c[1];
    bytes_[i + 2] = c[2];
  }
  std::span<const std::uint8_t> bytes() const noexcept { return bytes_; }

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bytes_;
};

/// Dense row-major single-channel raster.
template <class T>
class Grid {
 public:
  Grid() = default;
  Grid(int width, int height, T fill = T{}) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw EmptyInputError("grid dimensions must be positive");
    values_.assign(static_cast<std::size_t>(width) * height, fill);
  }
  Grid(int width, int height, std::vector<T> values)
      : width_(width), height_(height), values_(std::move(values)) {
    if (width <= 0 || height <= 0) throw EmptyInputError("grid dimensions must be positive");
    if (values_.size() != static_cast<std::size_t>(width) * height)
      throw DimensionMismatchError("grid value count does not match dimensions");
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) noexcept { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  const T& operator()(int x, int y) const noexcept {
    return values_[static_cast<std::size_t>(y) * width_ + x];
  }
  T& operator[](std::size_t i) noexcept { return values_[i]; }
  const T& operator[](std::size_t i) const noexcept { return values_[i]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  bool same_shape(const Grid<auto>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }
  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

using PlaneMap = Grid<double>;
/// Values are 0 or 1.
using BinaryMask = Grid<std::uint8_t>;

struct Planes {
  PlaneMap gray;
  PlaneMap red;
  PlaneMap green;
  PlaneMap blue;
};

enum class GrayMode { Mean, Luma };

/// Splits an image into its gray plane and the three chromatic planes.
/// Gray defaults to the unweighted channel mean.
Planes to_planes(const RasterImage& img, GrayMode mode = GrayMode::Mean);

PlaneMap gray_plane(const RasterImage& img, GrayMode mode = GrayMode::Mean);

BinaryMask threshold_at(const PlaneMap& plane, double level);
PlaneMap to_plane(const BinaryMask& mask);
std::size_t count_set(const BinaryMask& mask);

/// Area-averaging downsample so that max(width, height) <= max_dim.
/// Returns the input unchanged when it already fits or max_dim <= 0.
RasterImage limit_size(const RasterImage& img, int max_dim);
BinaryMask resize_nearest(const BinaryMask& mask, int width, int height);

}  // namespace lesion
