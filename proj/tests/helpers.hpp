#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "lesionkit/image.hpp"
#include "lesionkit/random.hpp"
#include "lesionkit/region.hpp"

namespace testutil {

using namespace lesion;

/// `fg` where the mask is set, `bg` elsewhere.
inline RasterImage paint(const BinaryMask& m, Rgb fg, Rgb bg) {
  RasterImage img(m.width(), m.height(), bg);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(x, y)) img.set(x, y, fg);
  return img;
}

inline double iou(const BinaryMask& a, const BinaryMask& b) {
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
}

inline BinaryMask mask_of(const Region& r) {
  BinaryMask m(r.image_width, r.image_height);
  for (const Point p : r.pixels) m(p.x, p.y) = 1;
  return m;
}

/// Random star-shaped blob, possibly with a hole, possibly cut by the frame.
inline BinaryMask random_blob(Rng& rng) {
  const int w = 20 + static_cast<int>(rng.index(40)), h = 20 + static_cast<int>(rng.index(40));
  const double cx = rng.uniform(0.0, w), cy = rng.uniform(0.0, h);
  const double r0 = rng.uniform(3.0, 15.0);
  std::array<double, 4> amp{}, ph{};
  for (std::size_t k = 0; k < 4; ++k) {
    amp[k] = rng.uniform(0.0, 0.4);
    ph[k] = rng.uniform(0.0, 6.3);
  }
  const double hole = rng.uniform() < 0.3 ? rng.uniform(0.2, 0.6) * r0 : 0.0;
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double th = std::atan2(y - cy, x - cx), r = std::hypot(x - cx, y - cy);
      double edge = r0;
      for (std::size_t k = 0; k < 4; ++k) edge *= 1.0 + amp[k] * std::cos((k + 2) * th + ph[k]);
      m(x, y) = (r <= edge && r >= hole) ? 1 : 0;
    }
  return m;
}

}  // namespace testutil
