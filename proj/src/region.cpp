#include "lesionkit/region.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace lesion {
namespace {

// Counter-clockwise on screen (y grows downward).
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

std::int64_t cross(Point o, Point a, Point b) {
  return static_cast<std::int64_t>(a.x - o.x) * (b.y - o.y) -
         static_cast<std::int64_t>(a.y - o.y) * (b.x - o.x);
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return -floor_div(-a, b); }

/// Boundary following on a mask whose frame is guaranteed unset.
std::vector<Point> trace(const BinaryMask& m, Point start) {
  std::vector<Point> chain{start};
  Point cur = start;
  int dir = 7;
  while (true) {
    const int first = (dir % 2 == 0) ? (dir + 7) % 8 : (dir + 6) % 8;
    bool found = false;
    for (int i = 0; i < 8; ++i) {
      const int d = (first + i) % 8;
      const Point q{cur.x + kDx[d], cur.y + kDy[d]};
      if (m(q.x, q.y)) {
        cur = q;
        dir = d;
        found = true;
        break;
      }
    }
    if (!found) return chain;  // isolated pixel
    chain.push_back(cur);
    const std::size_t n = chain.size();
    if (n > 3 && chain[n - 1] == chain[1] && chain[n - 2] == chain[0]) {
      chain.resize(n - 2);
      return chain;
    }
  }
}

// 4-connected flood fill of value `from` starting at `seed`, writing `to`.
void flood4(Grid<std::uint8_t>& g, Point seed, std::uint8_t from, std::uint8_t to,
            std::vector<Point>* visited = nullptr) {
  if (g(seed.x, seed.y) != from) return;
  std::vector<Point> stack{seed};
  g(seed.x, seed.y) = to;
  while (!stack.empty()) {
    const Point p = stack.back();
    stack.pop_back();
    if (visited) visited->push_back(p);
    const Point nb[4] = {{p.x + 1, p.y}, {p.x - 1, p.y}, {p.x, p.y + 1}, {p.x, p.y - 1}};
    for (const Point q : nb) {
      if (g.contains(q.x, q.y) && g(q.x, q.y) == from) {
        g(q.x, q.y) = to;
        stack.push_back(q);
      }
    }
  }
}

template <class Same>
ComponentLabels label_impl(int w, int h, Same&& same, const std::vector<std::uint8_t>& active) {
  ComponentLabels out{Grid<int>(w, h, -1), 0};
  std::vector<Point> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (!active[i] || out.ids(x, y) >= 0) continue;
      const int id = out.count++;
      out.ids(x, y) = id;
      stack.push_back({x, y});
      while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        for (int d = 0; d < 8; ++d) {
          const int qx = p.x + kDx[d], qy = p.y + kDy[d];
          if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
          const std::size_t j = static_cast<std::size_t>(qy) * w + qx;
          if (!active[j] || out.ids(qx, qy) >= 0 || !same(i, j)) continue;
          out.ids(qx, qy) = id;
          stack.push_back({qx, qy});
        }
      }
    }
  }
  return out;
}

}  // namespace

double chain_length(const std::vector<Point>& chain, bool closed) {
  if (chain.size() < 2) return 0.0;
  double len = 0.0;
  const std::size_t n = chain.size();
  const std::size_t steps = closed ? n : n - 1;
  for (std::size_t i = 0; i < steps; ++i) {
    const Point a = chain[i], b = chain[(i + 1) % n];
    const int dx = std::abs(a.x - b.x), dy = std::abs(a.y - b.y);
    len += (dx != 0 && dy != 0) ? std::numbers::sqrt2 : static_cast<double>(dx + dy);
  }
  return len;
}

std::vector<Point> convex_hull(std::vector<Point> pts) {
  std::sort(pts.begin(), pts.end(), [](Point a, Point b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 1) return pts;
  std::vector<Point> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Point p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    const Point p = pts[i];
    while (k >= t && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  hull.resize(k - 1);
  return hull;
}

std::size_t HullSpans::count() const {
  std::size_t n = 0;
  for (const auto& [a, b] : rows)
    if (b >= a) n += static_cast<std::size_t>(b - a + 1);
  return n;
}

HullSpans rasterize_hull(const std::vector<Point>& hull) {
  HullSpans spans;
  if (hull.empty()) return spans;
  int ymin = hull[0].y, ymax = hull[0].y, xmin = hull[0].x, xmax = hull[0].x;
  for (const Point p : hull) {
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
  }
  spans.y0 = ymin;
  spans.rows.assign(static_cast<std::size_t>(ymax - ymin + 1), {1, 0});
  if (hull.size() == 1) {
    spans.rows[0] = {hull[0].x, hull[0].x};
    return spans;
  }
  if (hull.size() == 2) {
    const Point a = hull[0], b = hull[1];
    const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
    for (int y = ymin; y <= ymax; ++y) {
      auto& row = spans.rows[static_cast<std::size_t>(y - ymin)];
      if (dy == 0) {
        row = {xmin, xmax};
      } else if ((dx * (y - a.y)) % dy == 0) {
        const int x = static_cast<int>(a.x + dx * (y - a.y) / dy);
        row = {x, x};
      }
    }
    return spans;
  }
  for (int y = ymin; y <= ymax; ++y) {
    std::int64_t lo = xmin, hi = xmax;
    for (std::size_t i = 0; i < hull.size() && lo <= hi; ++i) {
      const Point a = hull[i], b = hull[(i + 1) % hull.size()];
      const std::int64_t dx = b.x - a.x, dy = b.y - a.y;
      // inside: dx*(y-ay) - dy*(x-ax) >= 0
      const std::int64_t rhs = dx * (y - a.y) + dy * a.x;  // dy*x <= rhs
      if (dy > 0) {
        hi = std::min(hi, floor_div(rhs, dy));
      } else if (dy < 0) {
        lo = std::max(lo, ceil_div(rhs, dy));
      } else if (dx * (y - a.y) < 0) {
        hi = lo - 1;
      }
    }
    if (lo <= hi) spans.rows[static_cast<std::size_t>(y - ymin)] = {static_cast<int>(lo), static_cast<int>(hi)};
  }
  return spans;
}

Region make_region(std::vector<Point> pixels, int image_width, int image_height) {
  if (pixels.empty()) throw EmptyInputError("region needs at least one pixel");
  std::sort(pixels.begin(), pixels.end(), [](Point a, Point b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  Region rg;
  rg.image_width = image_width;
  rg.image_height = image_height;
  rg.area = pixels.size();
  BBox bb{pixels[0].x, pixels[0].y, pixels[0].x, pixels[0].y};
  double sx = 0.0, sy = 0.0;
  for (const Point p : pixels) {
    bb.x0 = std::min(bb.x0, p.x);
    bb.x1 = std::max(bb.x1, p.x);
    bb.y0 = std::min(bb.y0, p.y);
    bb.y1 = std::max(bb.y1, p.y);
    sx += p.x;
    sy += p.y;
  }
  rg.bbox = bb;
  rg.centroid = {sx / static_cast<double>(rg.area), sy / static_cast<double>(rg.area)};
  rg.touches_border = bb.x0 == 0 || bb.y0 == 0 || bb.x1 == image_width - 1 || bb.y1 == image_height - 1;

  // Local mask with a one-pixel unset frame; value 1 = region, 0 = background.
  const int lw = bb.width() + 2, lh = bb.height() + 2;
  const int ox = bb.x0 - 1, oy = bb.y0 - 1;
  BinaryMask local(lw, lh);
  for (const Point p : pixels) local(p.x - ox, p.y - oy) = 1;

  std::vector<Point> boundary = trace(local, {pixels[0].x - ox, pixels[0].y - oy});
  std::size_t on_frame = 0;
  for (Point& p : boundary) {
    p.x += ox;
    p.y += oy;
    if (p.x == 0 || p.y == 0 || p.x == image_width - 1 || p.y == image_height - 1) ++on_frame;
  }
  rg.border_fraction = static_cast<double>(on_frame) / static_cast<double>(boundary.size());
  std::size_t frame_px = 0;
  for (const Point p : pixels)
    if (p.x == 0 || p.y == 0 || p.x == image_width - 1 || p.y == image_height - 1) ++frame_px;
  const std::size_t frame_total = image_width == 1 || image_height == 1
                                      ? static_cast<std::size_t>(image_width) * image_height
                                      : 2 * static_cast<std::size_t>(image_width + image_height) - 4;
  rg.frame_coverage = static_cast<double>(frame_px) / static_cast<double>(frame_total);
  rg.outer_perimeter = chain_length(boundary, true);
  rg.boundary = std::move(boundary);

  // Holes: background not 4-reachable from the frame.
  flood4(local, {0, 0}, 0, 2);
  for (int y = 0; y < lh; ++y) {
    for (int x = 0; x < lw; ++x) {
      if (local(x, y) != 0) continue;
      std::vector<Point> hole;
      flood4(local, {x, y}, 0, 3, &hole);
      ++rg.holes;
      rg.hole_area += hole.size();
      std::sort(hole.begin(), hole.end(), [](Point a, Point b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      BinaryMask hm(lw, lh);
      for (const Point p : hole) hm(p.x, p.y) = 1;
      rg.hole_perimeter += chain_length(trace(hm, hole[0]), true);
    }
  }

  // Row extremes are enough for the hull.
  std::vector<Point> extremes;
  for (std::size_t i = 0; i < pixels.size();) {
    std::size_t j = i;
    while (j + 1 < pixels.size() && pixels[j + 1].y == pixels[i].y) ++j;
    extremes.push_back(pixels[i]);
    if (j != i) extremes.push_back(pixels[j]);
    i = j + 1;
  }
  rg.hull = convex_hull(std::move(extremes));
  rg.hull_area = rasterize_hull(rg.hull).count();
  rg.solidity = static_cast<double>(rg.area) / static_cast<double>(rg.hull_area);
  rg.pixels = std::move(pixels);
  return rg;
}

BinaryMask region_mask(const Region& rg) {
  BinaryMask m(rg.image_width, rg.image_height);
  for (const Point p : rg.pixels) m(p.x, p.y) = 1;
  return m;
}

BinaryMask union_mask(const std::vector<const Region*>& regions, int width, int height) {
  BinaryMask m(width, height);
  for (const Region* rg : regions)
    for (const Point p : rg->pixels) m(p.x, p.y) = 1;
  return m;
}

ComponentLabels label_components(const BinaryMask& mask) {
  std::vector<std::uint8_t> active(mask.values().begin(), mask.values().end());
  return label_impl(mask.width(), mask.height(), [](std::size_t, std::size_t) { return true; }, active);
}

ComponentLabels label_components(const Grid<int>& labels) {
  std::vector<std::uint8_t> active(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) active[i] = labels[i] >= 0 ? 1 : 0;
  return label_impl(labels.width(), labels.height(),
                    [&](std::size_t i, std::size_t j) { return labels[i] == labels[j]; }, active);
}

std::vector<Region> connected_regions(const BinaryMask& mask, std::size_t min_area) {
  const ComponentLabels cl = label_components(mask);
  std::vector<std::vector<Point>> members(static_cast<std::size_t>(cl.count));
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (const int id = cl.ids(x, y); id >= 0) members[static_cast<std::size_t>(id)].push_back({x, y});
  std::vector<Region> out;
  for (auto& px : members)
    if (px.size() >= std::max<std::size_t>(1, min_area))
      out.push_back(make_region(std::move(px), mask.width(), mask.height()));
  return out;
}

std::size_t default_min_area(int width, int height) {
  const double a = 0.0005 * static_cast<double>(width) * height;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(a)));
}

double centrality(PointF c, int width, int height) {
  const double cx = (width - 1) / 2.0, cy = (height - 1) / 2.0;
  const double reach = std::hypot(cx, cy);
  if (reach == 0.0) return 1.0;
  const double d = std::hypot(c.x - cx, c.y - cy);
  return std::clamp(1.0 - d / reach, 0.0, 1.0);
}

RegionStats region_stats(const Region& rg, int width, int height) {
  RegionStats s;
  s.centrality = centrality(rg.centroid, width, height);
  s.normalized_area = static_cast<double>(rg.area) / (static_cast<double>(width) * height);
  s.solidity = rg.solidity;
  const double perimeter = rg.outer_perimeter + rg.hole_perimeter;
  s.compactness = perimeter > 0.0
                      ? std::min(1.0, 4.0 * std::numbers::pi * static_cast<double>(rg.area) / (perimeter * perimeter))
                      : 1.0;
  s.coverage = static_cast<double>(rg.area) / static_cast<double>(rg.bbox.area());
  return s;
}

BinaryMask convex_hull_mask(const std::vector<Region>& regions, int width, int height) {
  if (regions.empty()) throw EmptyInputError("convex_hull_mask needs at least one region");
  std::vector<Point> pts;
  for (const Region& rg : regions) pts.insert(pts.end(), rg.hull.begin(), rg.hull.end());
  const HullSpans spans = rasterize_hull(convex_hull(std::move(pts)));
  BinaryMask m(width, height);
  for (std::size_t r = 0; r < spans.rows.size(); ++r) {
    const int y = spans.y0 + static_cast<int>(r);
    if (y < 0 || y >= height) continue;
    for (int x = std::max(0, spans.rows[r].first); x <= std::min(width - 1, spans.rows[r].second); ++x)
      m(x, y) = 1;
  }
  return m;
}

BinaryMask convex_hull_mask(const BinaryMask& mask) {
  return convex_hull_mask(connected_regions(mask, 1), mask.width(), mask.height());
}

Grid<std::int64_t> squared_distance_transform(const BinaryMask& mask) {
  if (count_set(mask) == 0) throw EmptyInputError("distance transform of an empty mask");
  const int w = mask.width() + 2, h = mask.height() + 2;
  auto set = [&](int x, int y) {
    return x >= 1 && y >= 1 && x <= mask.width() && y <= mask.height() && mask(x - 1, y - 1);
  };
  // Column pass: distance to the nearest unset pixel in the same column.
  Grid<std::int64_t> col(w, h);
  for (int x = 0; x < w; ++x) {
    std::int64_t run = 0;
    for (int y = 0; y < h; ++y) {
      run = set(x, y) ? run + 1 : 0;
      col(x, y) = run;
    }
    run = 0;
    for (int y = h - 1; y >= 0; --y) {
      run = set(x, y) ? run + 1 : 0;
      col(x, y) = std::min(col(x, y), run);
    }
  }
  // Row pass: lower envelope of parabolas f(q) + (p - q)^2.
  Grid<std::int64_t> out(mask.width(), mask.height());
  std::vector<std::int64_t> f(static_cast<std::size_t>(w));
  std::vector<int> v(static_cast<std::size_t>(w));
  std::vector<double> z(static_cast<std::size_t>(w) + 1);
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 0; x < w; ++x) f[static_cast<std::size_t>(x)] = col(x, y) * col(x, y);
    int k = 0;
    v[0] = 0;
    z[0] = -1e300;
    z[1] = 1e300;
    auto meet = [&](int q, int r) {
      return static_cast<double>((f[static_cast<std::size_t>(q)] + std::int64_t{q} * q) -
                                 (f[static_cast<std::size_t>(r)] + std::int64_t{r} * r)) /
             (2.0 * (q - r));
    };
    for (int q = 1; q < w; ++q) {
      double s = meet(q, v[static_cast<std::size_t>(k)]);
      while (s <= z[static_cast<std::size_t>(k)]) {
        --k;
        s = meet(q, v[static_cast<std::size_t>(k)]);
      }
      ++k;
      v[static_cast<std::size_t>(k)] = q;
      z[static_cast<std::size_t>(k)] = s;
      z[static_cast<std::size_t>(k) + 1] = 1e300;
    }
    k = 0;
    for (int p = 1; p < w - 1; ++p) {
      while (z[static_cast<std::size_t>(k) + 1] < p) ++k;
      const int vk = v[static_cast<std::size_t>(k)];
      const std::int64_t d = std::int64_t{p - vk};
      out(p - 1, y - 1) = set(p, y) ? f[static_cast<std::size_t>(vk)] + d * d : 0;
    }
  }
  return out;
}

PlaneMap distance_transform(const BinaryMask& mask) {
  const Grid<std::int64_t> sq = squared_distance_transform(mask);
  PlaneMap out(mask.width(), mask.height());
  for (std::size_t i = 0; i < sq.size(); ++i) out[i] = std::sqrt(static_cast<double>(sq[i]));
  return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  std::vector<Point> offsets;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) offsets.push_back({dx, dy});
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) {
      if (!mask(x, y)) continue;
      for (const Point o : offsets)
        if (out.contains(x + o.x, y + o.y)) out(x + o.x, y + o.y) = 1;
    }
  return out;
}

BinaryMask erode(const BinaryMask& mask, int radius) {
  if (radius <= 0) return mask;
  BinaryMask inv(mask.width(), mask.height());
  for (std::size_t i = 0; i < mask.size(); ++i) inv[i] = mask[i] ? 0 : 1;
  BinaryMask out = dilate(inv, radius);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] ? 0 : 1;
  return out;
}

BinaryMask close(const BinaryMask& mask, int radius) { return erode(dilate(mask, radius), radius); }

BinaryMask fill_holes(const BinaryMask& mask) {
  const int w = mask.width() + 2, h = mask.height() + 2;
  Grid<std::uint8_t> g(w, h);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) g(x + 1, y + 1) = mask(x, y);
  flood4(g, {0, 0}, 0, 2);
  BinaryMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) out(x, y) = g(x + 1, y + 1) != 2 ? 1 : 0;
  return out;
}

}  // namespace lesion
