#include "lesionkit/image.hpp"

#include <algorithm>
#include <cmath>

namespace lesion {

RasterImage::RasterImage(int width, int height, Rgb fill) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) throw EmptyInputError("image dimensions must be positive");
  bytes_.resize(pixel_count() * 3);
  for (std::size_t i = 0; i < pixel_count(); ++i) {
    bytes_[3 * i] = fill[0];
    bytes_[3 * i + 1] = fill[1];
    bytes_[3 * i + 2] = fill[2];
  }
}

RasterImage::RasterImage(int width, int height, std::vector<std::uint8_t> interleaved)
    : width_(width), height_(height), bytes_(std::move(interleaved)) {
  if (width <= 0 || height <= 0) throw EmptyInputError("image dimensions must be positive");
  if (bytes_.size() != pixel_count() * 3)
    throw DimensionMismatchError("pixel buffer size does not match width*height*3");
}

Planes to_planes(const RasterImage& img, GrayMode mode) {
  const int w = img.width(), h = img.height();
  Planes p{PlaneMap(w, h), PlaneMap(w, h), PlaneMap(w, h), PlaneMap(w, h)};
  const auto bytes = img.bytes();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double r = bytes[3 * i], g = bytes[3 * i + 1], b = bytes[3 * i + 2];
    p.red[i] = r;
    p.green[i] = g;
    p.blue[i] = b;
    p.gray[i] = mode == GrayMode::Mean ? (r + g + b) / 3.0 : 0.299 * r + 0.587 * g + 0.114 * b;
  }
  return p;
}

PlaneMap gray_plane(const RasterImage& img, GrayMode mode) { return to_planes(img, mode).gray; }

BinaryMask threshold_at(const PlaneMap& plane, double level) {
  BinaryMask m(plane.width(), plane.height());
  for (std::size_t i = 0; i < plane.size(); ++i) m[i] = plane[i] >= level ? 1 : 0;
  return m;
}

PlaneMap to_plane(const BinaryMask& mask) {
  PlaneMap p(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) p[i] = mask[i] ? 1.0 : 0.0;
  return p;
}

std::size_t count_set(const BinaryMask& mask) {
  return static_cast<std::size_t>(std::count_if(mask.values().begin(), mask.values().end(),
                                                [](std::uint8_t v) { return v != 0; }));
}

RasterImage limit_size(const RasterImage& img, int max_dim) {
  const int longest = std::max(img.width(), img.height());
  if (max_dim <= 0 || longest <= max_dim) return img;
  const double scale = static_cast<double>(max_dim) / longest;
  const int w = std::max(1, static_cast<int>(std::lround(img.width() * scale)));
  const int h = std::max(1, static_cast<int>(std::lround(img.height() * scale)));
  RasterImage out(w, h);
  const double sx = static_cast<double>(img.width()) / w;
  const double sy = static_cast<double>(img.height()) / h;
  for (int y = 0; y < h; ++y) {
    const int y0 = static_cast<int>(std::floor(y * sy));
    const int y1 = std::max(y0 + 1, std::min(img.height(), static_cast<int>(std::floor((y + 1) * sy))));
    for (int x = 0; x < w; ++x) {
      const int x0 = static_cast<int>(std::floor(x * sx));
      const int x1 = std::max(x0 + 1, std::min(img.width(), static_cast<int>(std::floor((x + 1) * sx))));
      double acc[3] = {0, 0, 0};
      for (int yy = y0; yy < y1; ++yy)
        for (int xx = x0; xx < x1; ++xx) {
          const Rgb c = img.at(xx, yy);
          for (int k = 0; k < 3; ++k) acc[k] += c[k];
        }
      const double n = static_cast<double>((y1 - y0) * (x1 - x0));
      out.set(x, y,
              {static_cast<std::uint8_t>(std::lround(acc[0] / n)),
               static_cast<std::uint8_t>(std::lround(acc[1] / n)),
               static_cast<std::uint8_t>(std::lround(acc[2] / n))});
    }
  }
  return out;
}

BinaryMask resize_nearest(const BinaryMask& mask, int width, int height) {
  if (mask.width() == width && mask.height() == height) return mask;
  BinaryMask out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(mask.height() - 1, static_cast<int>((y + 0.5) * mask.height() / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(mask.width() - 1, static_cast<int>((x + 0.5) * mask.width() / width));
      out(x, y) = mask(sx, sy);
    }
  }
  return out;
}

}  // namespace lesion
