#include "lesionkit/topo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <numeric>
#include <tuple>

namespace lesion::topo {
namespace {

constexpr int kDx[8] = {1, 0, -1, 0, 1, -1, -1, 1};  // axial first
constexpr int kDy[8] = {0, -1, 0, 1, -1, -1, 1, 1};

int mirror(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i = std::abs(i) % period;
  return i >= n ? period - i : i;
}

double at_mirrored(const PlaneMap& p, int x, int y) {
  return p(mirror(x, p.width()), mirror(y, p.height()));
}

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return 0.0;
  const auto k = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(k), v.end());
  return v[k];
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  // Shifted by the first value so constant input gives exactly 0.
  const double k = v[0], n = static_cast<double>(v.size());
  double s = 0.0, s2 = 0.0;
  for (const double x : v) {
    s += x - k;
    s2 += (x - k) * (x - k);
  }
  return std::sqrt(std::max(0.0, (s2 - s * s / n) / n));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Offset along one of four axial directions nearest to `angle`.
Point sector_offset(double angle) {
  int s = static_cast<int>(std::lround(angle / (std::numbers::pi / 4.0)));
  s = ((s % 4) + 4) % 4;
  static constexpr Point offs[4] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};
  return offs[s];
}

BinaryMask hysteresis(const PlaneMap& strength, const BinaryMask& candidate, const ContourOptions& opts) {
  const int w = strength.width(), h = strength.height();
  BinaryMask out(w, h);
  std::vector<double> vals;
  for (std::size_t i = 0; i < candidate.size(); ++i)
    if (candidate[i]) vals.push_back(strength[i]);
  if (vals.empty()) return out;
  const double high = quantile(vals, opts.high_percentile);
  const double low = quantile(vals, opts.low_percentile);
  std::vector<Point> stack;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (candidate(x, y) && strength(x, y) >= high && !out(x, y)) {
        out(x, y) = 1;
        stack.push_back({x, y});
        while (!stack.empty()) {
          const Point p = stack.back();
          stack.pop_back();
          for (int d = 0; d < 8; ++d) {
            const int qx = p.x + kDx[d], qy = p.y + kDy[d];
            if (!out.contains(qx, qy) || out(qx, qy) || !candidate(qx, qy) || strength(qx, qy) < low) continue;
            out(qx, qy) = 1;
            stack.push_back({qx, qy});
          }
        }
      }
  return out;
}

PlaneMap negate(const PlaneMap& p) {
  PlaneMap out = p;
  for (double& v : out.values()) v = -v;
  return out;
}

double turn_angle(PointF a, PointF b) { return std::atan2(a.x * b.y - a.y * b.x, a.x * b.x + a.y * b.y); }

PointF diff(Point a, Point b) { return {static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y)}; }

double axis_orientation(const std::vector<Point>& pts) {
  double mx = 0.0, my = 0.0;
  for (const Point p : pts) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const Point p : pts) {
    sxx += (p.x - mx) * (p.x - mx);
    syy += (p.y - my) * (p.y - my);
    sxy += (p.x - mx) * (p.y - my);
  }
  double th = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  if (th < 0.0) th += std::numbers::pi;
  if (th >= std::numbers::pi) th -= std::numbers::pi;
  return th;
}

std::array<double, kContourAttributes> describe_piece(const std::vector<Point>& pts, const RasterImage& img,
                                                      const PlaneMap& gray) {
  std::array<double, kContourAttributes> a{};
  const std::size_t n = pts.size();
  const double arc = chain_length(pts, false);
  const double chord = std::hypot(pts.back().x - pts.front().x, pts.back().y - pts.front().y);

  std::vector<double> kappa, bends;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const PointF v1 = diff(pts[i], pts[i - 2]), v2 = diff(pts[i + 2], pts[i]);
    const double l = 0.5 * (std::hypot(v1.x, v1.y) + std::hypot(v2.x, v2.y));
    const double th = turn_angle(v1, v2);
    bends.push_back(th);
    kappa.push_back(l > 0.0 ? th / l : 0.0);
  }
  std::vector<double> turns;
  for (std::size_t i = 1; i + 1 < n; ++i) turns.push_back(std::abs(turn_angle(diff(pts[i], pts[i - 1]), diff(pts[i + 1], pts[i]))));
  int turn_count = 0;
  bool in_turn = false;
  for (const double b : bends) {
    const bool sharp = std::abs(b) > std::numbers::pi / 4.0;
    if (sharp && !in_turn) ++turn_count;
    in_turn = sharp;
  }
  int x0 = pts[0].x, x1 = x0, y0 = pts[0].y, y1 = y0;
  for (const Point p : pts) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double bw = x1 - x0 + 1, bh = y1 - y0 + 1;

  a[0] = arc;
  a[1] = mean_of(kappa);
  a[2] = std_of(kappa);
  a[3] = mean_of(turns);
  a[4] = arc > 0.0 ? std::min(1.0, chord / arc) : 1.0;
  a[5] = axis_orientation(pts);
  a[6] = chord;
  a[7] = 1.0 - std::min(bw, bh) / std::max(bw, bh);
  a[8] = turn_count;

  std::vector<double> inten, range;
  double r = 0.0, g = 0.0, b = 0.0;
  for (const Point p : pts) {
    inten.push_back(gray(p.x, p.y));
    double lo = gray(p.x, p.y), hi = lo;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (gray.contains(p.x + dx, p.y + dy)) {
          lo = std::min(lo, gray(p.x + dx, p.y + dy));
          hi = std::max(hi, gray(p.x + dx, p.y + dy));
        }
    range.push_back(hi - lo);
    const Rgb c = img.at(p.x, p.y);
    r += c[0];
    g += c[1];
    b += c[2];
  }
  a[9] = mean_of(inten);
  a[10] = mean_of(range);
  a[11] = std_of(inten);
  a[12] = r / static_cast<double>(n);
  a[13] = g / static_cast<double>(n);
  a[14] = b / static_cast<double>(n);
  return a;
}

struct Dsu {
  std::vector<std::size_t> parent;
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

double distance(PointF a, PointF b) { return std::hypot(a.x - b.x, a.y - b.y); }

ContourGroup make_group(GroupKind kind, std::vector<std::size_t> members, const std::vector<ContourSegment>& segs) {
  std::sort(members.begin(), members.end());
  ContourGroup grp;
  grp.kind = kind;
  grp.members = members;
  for (const std::size_t i : members) {
    const PointF m = segs[i].midpoint();
    grp.pole.x += m.x;
    grp.pole.y += m.y;
  }
  grp.pole.x /= static_cast<double>(members.size());
  grp.pole.y /= static_cast<double>(members.size());

  std::vector<double> radii, lengths, orient, inten, contrast, fuzz, chroma;
  std::vector<Point> all;
  for (const std::size_t i : members) {
    const ContourSegment& s = segs[i];
    radii.push_back(distance(s.midpoint(), grp.pole));
    lengths.push_back(s.length());
    orient.push_back(s.orientation());
    inten.push_back(s.attributes[9]);
    contrast.push_back(s.attributes[10]);
    fuzz.push_back(s.attributes[11]);
    const double sum = s.attributes[12] + s.attributes[13] + s.attributes[14];
    chroma.push_back(sum > 0.0 ? (s.attributes[12] - s.attributes[13]) / sum : 0.0);
    all.insert(all.end(), s.points.begin(), s.points.end());
  }
  const OrientationScores os = orientation_scores(orient);
  int x0 = all[0].x, x1 = x0, y0 = all[0].y, y1 = y0;
  for (const Point p : all) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double box = static_cast<double>(x1 - x0 + 1) * (y1 - y0 + 1);
  const double hull = static_cast<double>(rasterize_hull(convex_hull(all)).count());
  const double mean_len = mean_of(lengths);

  auto& a = grp.attributes;
  a[0] = *std::min_element(radii.begin(), radii.end());
  a[1] = *std::max_element(radii.begin(), radii.end());
  a[2] = mean_of(radii);
  a[3] = std_of(radii);
  a[4] = mean_len;
  a[5] = std_of(lengths);
  a[6] = static_cast<double>(members.size());
  a[7] = mean_len > 0.0 ? a[2] / mean_len : 0.0;
  a[8] = os.uni;
  a[9] = os.null;
  a[10] = os.cross;
  a[11] = hull / box;
  a[12] = mean_of(inten);
  a[13] = std_of(inten);
  a[14] = mean_of(contrast);
  a[15] = std_of(contrast);
  a[16] = mean_of(fuzz);
  a[17] = std_of(fuzz);
  a[18] = mean_of(chroma);
  return grp;
}

std::vector<std::vector<std::size_t>> components_of(Dsu& dsu, const std::vector<std::size_t>& ids) {
  std::vector<std::vector<std::size_t>> comps;
  std::vector<std::size_t> root_slot(ids.size(), SIZE_MAX);
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const std::size_t r = dsu.find(k);
    if (root_slot[r] == SIZE_MAX) {
      root_slot[r] = comps.size();
      comps.emplace_back();
    }
    comps[root_slot[r]].push_back(ids[k]);
  }
  return comps;
}

// Splits a linked set of segments into runs spanning < 30 degrees of orientation.
void orientation_runs(std::vector<std::size_t> comp, const std::vector<ContourSegment>& segs, GroupKind kind,
                      std::vector<ContourGroup>& out) {
  constexpr double kGate = std::numbers::pi / 6.0;
  if (comp.size() < 2) return;
  std::sort(comp.begin(), comp.end(), [&](std::size_t a, std::size_t b) {
    const ContourSegment &s = segs[a], &t = segs[b];
    const PointF ms = s.midpoint(), mt = t.midpoint();
    return std::tie(s.attributes[5], ms.x, ms.y, s.attributes[0], a) <
           std::tie(t.attributes[5], mt.x, mt.y, t.attributes[0], b);
  });
  const std::size_t n = comp.size();
  // Start after the widest circular gap so that runs never straddle it.
  std::size_t start = 0;
  double widest = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cur = segs[comp[i]].orientation();
    const double prev = segs[comp[(i + n - 1) % n]].orientation();
    const double gap = i == 0 ? cur + std::numbers::pi - prev : cur - prev;
    if (gap > widest) {
      widest = gap;
      start = i;
    }
  }
  std::vector<std::size_t> run;
  double run_start = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t idx = comp[(start + j) % n];
    double ang = segs[idx].orientation();
    if (start + j >= n) ang += std::numbers::pi;
    if (!run.empty() && ang - run_start >= kGate) {
      if (run.size() >= 2) out.push_back(make_group(kind, run, segs));
      run.clear();
    }
    if (run.empty()) run_start = ang;
    run.push_back(idx);
  }
  if (run.size() >= 2) out.push_back(make_group(kind, run, segs));
}

}  // namespace

PlaneMap gaussian_blur(const PlaneMap& plane, double sigma) {
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  constexpr double kScale = 1048576.0;  // 2^20
  std::vector<double> raw(2 * static_cast<std::size_t>(r) + 1);
  for (int i = -r; i <= r; ++i) raw[static_cast<std::size_t>(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  std::vector<double> taps(raw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    taps[i] = std::round(raw[i] / sum * kScale);
    total += taps[i];
  }
  taps[static_cast<std::size_t>(r)] += kScale - total;
  for (double& t : taps) t /= kScale;

  const int w = plane.width(), h = plane.height();
  PlaneMap tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += taps[static_cast<std::size_t>(i + r)] * plane(mirror(x + i, w), y);
      tmp(x, y) = acc;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = -r; i <= r; ++i) acc += taps[static_cast<std::size_t>(i + r)] * tmp(x, mirror(y + i, h));
      out(x, y) = acc;
    }
  return out;
}

ScalePair scale_pair(const PlaneMap& gray) {
  ScalePair sp{gaussian_blur(gray, 1.0), gaussian_blur(gray, 2.0), PlaneMap(gray.width(), gray.height())};
  for (std::size_t i = 0; i < sp.dog.size(); ++i) sp.dog[i] = sp.blur1[i] - sp.blur2[i];
  return sp;
}

std::string_view kind_name(ContourKind k) {
  switch (k) {
    case ContourKind::Ridge: return "ridge";
    case ContourKind::River: return "river";
    case ContourKind::Edge: return "edge";
  }
  return "?";
}

BinaryMask ridge_mask(const PlaneMap& p, const ContourOptions& opts) {
  const int w = p.width(), h = p.height();
  PlaneMap strength(w, h);
  BinaryMask cand(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double c = p(x, y);
      const double ixx = at_mirrored(p, x + 1, y) - 2.0 * c + at_mirrored(p, x - 1, y);
      const double iyy = at_mirrored(p, x, y + 1) - 2.0 * c + at_mirrored(p, x, y - 1);
      const double ixy = (at_mirrored(p, x + 1, y + 1) - at_mirrored(p, x + 1, y - 1) - at_mirrored(p, x - 1, y + 1) +
                          at_mirrored(p, x - 1, y - 1)) /
                         4.0;
      const double half = 0.5 * (ixx - iyy);
      const double lam = 0.5 * (ixx + iyy) - std::sqrt(half * half + ixy * ixy);
      if (lam >= -1e-9) continue;
      // Eigenvector of lam; pick the better conditioned of the two forms.
      double nx = ixy, ny = lam - ixx;
      const double mx = lam - iyy, my = ixy;
      if (mx * mx + my * my > nx * nx + ny * ny) {
        nx = mx;
        ny = my;
      }
      if (nx == 0.0 && ny == 0.0) nx = 1.0;
      const Point d = sector_offset(std::atan2(ny, nx));
      if (c > at_mirrored(p, x - d.x, y - d.y) && c >= at_mirrored(p, x + d.x, y + d.y)) {
        cand(x, y) = 1;
        strength(x, y) = -lam;
      }
    }
  return hysteresis(strength, cand, opts);
}

BinaryMask edge_mask(const PlaneMap& p, const ContourOptions& opts) {
  const int w = p.width(), h = p.height();
  PlaneMap mag(w, h), ang(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double gx = 0.5 * (at_mirrored(p, x + 1, y) - at_mirrored(p, x - 1, y));
      const double gy = 0.5 * (at_mirrored(p, x, y + 1) - at_mirrored(p, x, y - 1));
      mag(x, y) = std::hypot(gx, gy);
      ang(x, y) = std::atan2(gy, gx);
    }
  BinaryMask cand(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double m = mag(x, y);
      if (m <= 1e-9) continue;
      const Point d = sector_offset(ang(x, y));
      auto mag_at = [&](int qx, int qy) { return mag.contains(qx, qy) ? mag(qx, qy) : 0.0; };
      if (m > mag_at(x - d.x, y - d.y) && m >= mag_at(x + d.x, y + d.y)) cand(x, y) = 1;
    }
  return hysteresis(mag, cand, opts);
}

std::vector<std::vector<Point>> link_chains(const BinaryMask& mask, std::size_t min_chain) {
  const int w = mask.width(), h = mask.height();
  BinaryMask seen(w, h);
  std::vector<std::vector<Point>> chains;
  auto neighbours = [&](int x, int y) {
    int n = 0;
    for (int d = 0; d < 8; ++d) {
      const int qx = x + kDx[d], qy = y + kDy[d];
      if (mask.contains(qx, qy) && mask(qx, qy)) ++n;
    }
    return n;
  };
  auto walk = [&](int x, int y) {
    std::vector<Point> chain{{x, y}};
    seen(x, y) = 1;
    Point cur{x, y};
    while (true) {
      bool moved = false;
      for (int d = 0; d < 8; ++d) {
        const int qx = cur.x + kDx[d], qy = cur.y + kDy[d];
        if (mask.contains(qx, qy) && mask(qx, qy) && !seen(qx, qy)) {
          seen(qx, qy) = 1;
          cur = {qx, qy};
          chain.push_back(cur);
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
    if (chain.size() >= min_chain) chains.push_back(std::move(chain));
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask(x, y) && !seen(x, y) && neighbours(x, y) <= 1) walk(x, y);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask(x, y) && !seen(x, y)) walk(x, y);
  return chains;
}

std::vector<RawContour> extract_contours(const ScalePair& sp, const ContourOptions& opts) {
  std::vector<RawContour> out;
  for (const int scale : {1, 2}) {
    const PlaneMap& plane = scale == 1 ? sp.blur1 : sp.blur2;
    const BinaryMask masks[3] = {ridge_mask(plane, opts), ridge_mask(negate(plane), opts), edge_mask(plane, opts)};
    const ContourKind kinds[3] = {ContourKind::Ridge, ContourKind::River, ContourKind::Edge};
    for (int k = 0; k < 3; ++k)
      for (auto& chain : link_chains(masks[k], opts.min_chain)) out.push_back({kinds[k], scale, std::move(chain)});
  }
  return out;
}

PointF ContourSegment::midpoint() const {
  const Point p = points[points.size() / 2];
  return {static_cast<double>(p.x), static_cast<double>(p.y)};
}

std::vector<std::vector<Point>> partition_chain(const std::vector<Point>& chain) {
  std::vector<std::vector<Point>> pieces;
  std::vector<std::pair<std::size_t, std::size_t>> stack{{0, chain.size() - 1}};
  std::vector<std::pair<std::size_t, std::size_t>> done;
  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    const PointF u = diff(chain[b], chain[a]);
    const double len = std::hypot(u.x, u.y);
    double best = -1.0;
    std::size_t at = a;
    for (std::size_t i = a + 1; i < b; ++i) {
      const PointF v = diff(chain[i], chain[a]);
      const double dev = len > 0.0 ? std::abs(u.x * v.y - u.y * v.x) / len : std::hypot(v.x, v.y);
      if (dev > best) {
        best = dev;
        at = i;
      }
    }
    if (at > a && best > std::max(0.1 * len, 1.0)) {
      stack.push_back({at, b});
      stack.push_back({a, at});
    } else {
      done.push_back({a, b});
    }
  }
  std::sort(done.begin(), done.end());
  for (const auto& [a, b] : done) pieces.emplace_back(chain.begin() + static_cast<std::ptrdiff_t>(a), chain.begin() + static_cast<std::ptrdiff_t>(b) + 1);
  return pieces;
}

std::vector<ContourSegment> partition_and_describe(const RawContour& raw, const RasterImage& img,
                                                   const PlaneMap& gray) {
  std::vector<ContourSegment> out;
  if (raw.points.size() < 4) return out;
  for (auto& piece : partition_chain(raw.points)) {
    if (piece.size() < 4) continue;
    ContourSegment seg{raw.kind, raw.scale, std::move(piece), {}};
    seg.attributes = describe_piece(seg.points, img, gray);
    out.push_back(std::move(seg));
  }
  return out;
}

std::vector<ContourSegment> partition_and_describe(const RawContour& raw, const RasterImage& img) {
  return partition_and_describe(raw, img, gray_plane(img));
}

OrientationScores orientation_scores(const std::vector<double>& orientations) {
  OrientationScores s;
  if (orientations.empty()) return s;
  double c2 = 0.0, s2 = 0.0, c4 = 0.0, s4 = 0.0;
  for (const double t : orientations) {
    c2 += std::cos(2.0 * t);
    s2 += std::sin(2.0 * t);
    c4 += std::cos(4.0 * t);
    s4 += std::sin(4.0 * t);
  }
  const double n = static_cast<double>(orientations.size());
  const double r2 = std::min(1.0, std::hypot(c2, s2) / n), r4 = std::min(1.0, std::hypot(c4, s4) / n);
  s.uni = r2;
  s.cross = std::max(0.0, r4 - r2);
  s.null = 1.0 - std::max(r2, r4);
  return s;
}

std::vector<ContourGroup> find_clots(const std::vector<ContourSegment>& segments) {
  std::vector<ContourGroup> out;
  if (segments.empty()) return out;
  std::vector<double> lengths;
  for (const auto& s : segments) lengths.push_back(s.length());
  const double median = median_of(lengths);
  std::vector<std::size_t> shorts;
  std::vector<double> short_lengths;
  for (std::size_t i = 0; i < segments.size(); ++i)
    if (segments[i].length() <= median) {
      shorts.push_back(i);
      short_lengths.push_back(segments[i].length());
    }
  if (shorts.size() < 3) return out;
  const double cutoff = 2.0 * median_of(short_lengths);
  Dsu dsu(shorts.size());
  for (std::size_t a = 0; a < shorts.size(); ++a)
    for (std::size_t b = a + 1; b < shorts.size(); ++b)
      if (distance(segments[shorts[a]].midpoint(), segments[shorts[b]].midpoint()) <= cutoff) dsu.unite(a, b);
  for (auto& comp : components_of(dsu, shorts))
    if (comp.size() >= 3) out.push_back(make_group(GroupKind::Clot, std::move(comp), segments));
  return out;
}

std::vector<ContourGroup> find_bundles(const std::vector<ContourSegment>& segments) {
  std::vector<ContourGroup> out;
  if (segments.size() < 2) return out;
  std::vector<double> lengths;
  for (const auto& s : segments) lengths.push_back(s.length());
  const double median = median_of(lengths);
  std::vector<std::size_t> longs;
  for (std::size_t i = 0; i < segments.size(); ++i)
    if (segments[i].length() >= median) longs.push_back(i);
  const std::size_t m = longs.size();
  if (m < 2) return out;

  std::vector<double> dist(m * m);
  std::vector<double> nn(m, std::numeric_limits<double>::infinity());
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) {
      dist[a * m + b] = distance(segments[longs[a]].midpoint(), segments[longs[b]].midpoint());
      if (a != b) nn[a] = std::min(nn[a], dist[a * m + b]);
    }
  // Tight cut-off: below the largest jump in the sorted nearest-neighbour distances.
  std::vector<double> sorted = nn;
  std::sort(sorted.begin(), sorted.end());
  double tight = sorted.back(), jump = 0.0;
  for (std::size_t i = 0; i + 1 < m; ++i)
    if (sorted[i + 1] - sorted[i] > jump) {
      jump = sorted[i + 1] - sorted[i];
      tight = sorted[i];
    }
  if (jump <= 1e-9 * (1.0 + sorted.back())) tight = sorted.back();

  for (const GroupKind kind : {GroupKind::BundleTight, GroupKind::BundleLoose}) {
    Dsu dsu(m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a + 1; b < m; ++b) {
        const double d = dist[a * m + b];
        const bool linked =
            kind == GroupKind::BundleTight
                ? d <= tight
                : d <= 0.5 * std::max(segments[longs[a]].length(), segments[longs[b]].length());
        if (linked) dsu.unite(a, b);
      }
    for (auto& comp : components_of(dsu, longs)) orientation_runs(std::move(comp), segments, kind, out);
  }
  return out;
}

BinaryMask contour_mask(const std::vector<RawContour>& contours, ContourKind kind, int scale, int width,
                        int height) {
  BinaryMask m(width, height);
  for (const auto& c : contours)
    if (c.kind == kind && c.scale == scale)
      for (const Point p : c.points) m(p.x, p.y) = 1;
  return m;
}

std::vector<DogRegion> dog_regions(const ScalePair& sp, const BinaryMask& edges1, const BinaryMask& edges2,
                                   std::size_t min_area) {
  const int w = sp.dog.width(), h = sp.dog.height();
  std::vector<double> mag(sp.dog.size());
  for (std::size_t i = 0; i < mag.size(); ++i) mag[i] = std::abs(sp.dog[i]);
  const double peak = *std::max_element(mag.begin(), mag.end());
  const double level = std::max({quantile(mag, 0.9), 1e-3 * peak, 1e-9});
  BinaryMask dog_mask(w, h);
  for (std::size_t i = 0; i < mag.size(); ++i) dog_mask[i] = mag[i] > level;

  const BinaryMask d1 = dilate(edges1, 2), d2 = dilate(edges2, 2);
  BinaryMask band(w, h);
  for (std::size_t i = 0; i < band.size(); ++i) band[i] = d1[i] && !d2[i];

  std::vector<DogRegion> out;
  const std::size_t floor_area = std::max<std::size_t>(min_area, 1);
  for (const auto& [src, mask] : {std::pair{DogSource::Dog, &dog_mask}, std::pair{DogSource::EdgeBand, &band}})
    for (Region& rg : connected_regions(*mask, floor_area)) {
      DogRegion dr{src, std::move(rg), {}, {}};
      dr.distribution = shape::distribution_descriptor(dr.region, w, h);
      dr.axis = shape::sym_axis_descriptors(dr.region, &sp.blur1);
      out.push_back(std::move(dr));
    }
  return out;
}

}  // namespace lesion::topo
