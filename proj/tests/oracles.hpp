#pragma once

// Brute-force reference implementations for the geometry kernels. They are
// deliberately naive and share no code with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <vector>

#include "lesionkit/image.hpp"
#include "lesionkit/random.hpp"

namespace oracle {

using lesion::BinaryMask;
using lesion::Point;

/// Pixel sets of the 8-connected components, via union-find.
inline std::set<std::set<Point>> components(const BinaryMask& m) {
  const int w = m.width(), h = m.height();
  std::vector<int> parent(static_cast<std::size_t>(w * h));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int i) {
    while (parent[static_cast<std::size_t>(i)] != i) i = parent[static_cast<std::size_t>(i)];
    return i;
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m(x, y)) continue;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (!m.contains(nx, ny) || !m(nx, ny)) continue;
          const int a = find(y * w + x), b = find(ny * w + nx);
          if (a != b) parent[static_cast<std::size_t>(a)] = b;
        }
    }
  std::vector<std::set<Point>> by_root(static_cast<std::size_t>(w * h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (m(x, y)) by_root[static_cast<std::size_t>(find(y * w + x))].insert({x, y});
  std::set<std::set<Point>> out;
  for (auto& s : by_root)
    if (!s.empty()) out.insert(std::move(s));
  return out;
}

inline long long cross(Point o, Point a, Point b) {
  return static_cast<long long>(a.x - o.x) * (b.y - o.y) - static_cast<long long>(a.y - o.y) * (b.x - o.x);
}

/// Pixels whose centers lie in the convex hull of the set pixels. A pixel is
/// inside iff it is not strictly separated from the point set by any line
/// through two set pixels (or, for collinear input, lies on the segment).
inline BinaryMask hull_mask(const BinaryMask& m) {
  std::vector<Point> pts;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(x, y)) pts.push_back({x, y});
  BinaryMask out(m.width(), m.height());
  if (pts.empty()) return out;
  bool collinear = true;
  for (const Point p : pts)
    if (cross(pts.front(), pts.back(), p) != 0) collinear = false;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      const Point q{x, y};
      bool inside = true;
      if (collinear) {
        Point a = pts.front(), b = pts.front();
        for (const Point p : pts) {
          a = std::min(a, p);
          b = std::max(b, p);
        }
        inside = cross(a, b, q) == 0 && std::min(a.x, b.x) <= q.x && q.x <= std::max(a.x, b.x) &&
                 std::min(a.y, b.y) <= q.y && q.y <= std::max(a.y, b.y);
      } else {
        for (std::size_t i = 0; i < pts.size() && inside; ++i)
          for (std::size_t j = 0; j < pts.size() && inside; ++j) {
            if (i == j) continue;
            bool all_left = true;
            for (const Point p : pts)
              if (cross(pts[i], pts[j], p) < 0) {
                all_left = false;
                break;
              }
            if (all_left && cross(pts[i], pts[j], q) < 0) inside = false;
          }
      }
      out(x, y) = inside ? 1 : 0;
    }
  return out;
}

/// Distance from each set pixel to the nearest unset pixel, where every
/// position outside the image counts as unset.
inline lesion::PlaneMap edt(const BinaryMask& m) {
  const int w = m.width(), h = m.height();
  lesion::PlaneMap out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m(x, y)) continue;
      long long best = std::numeric_limits<long long>::max();
      for (int yy = -1; yy <= h; ++yy)
        for (int xx = -1; xx <= w; ++xx) {
          const bool unset = !m.contains(xx, yy) || !m(xx, yy);
          if (!unset) continue;
          const long long d = static_cast<long long>(xx - x) * (xx - x) + static_cast<long long>(yy - y) * (yy - y);
          best = std::min(best, d);
        }
      out(x, y) = std::sqrt(static_cast<double>(best));
    }
  return out;
}

/// Random mask with side lengths in [1, max_side] and a random fill density.
inline BinaryMask random_mask(lesion::Rng& rng, int max_side) {
  const int w = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_side)));
  const int h = 1 + static_cast<int>(rng.index(static_cast<std::uint64_t>(max_side)));
  const double density = rng.uniform(0.05, 0.95);
  BinaryMask m(w, h);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.uniform() < density ? 1 : 0;
  return m;
}

inline BinaryMask disk_mask(int w, int h, double cx, double cy, double r) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m(x, y) = std::hypot(x - cx, y - cy) <= r ? 1 : 0;
  return m;
}

inline BinaryMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryMask m(w, h);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) m(x, y) = 1;
  return m;
}

}  // namespace oracle
