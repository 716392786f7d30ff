#include "lesionkit/shape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace lesion::shape {
namespace {

constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, -1, -1, -1, 0, 1, 1, 1};

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(std::span<const double> v) {
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

struct LocalMask {
  BinaryMask mask;
  Point origin;  // image coordinates of local (0, 0)
};

LocalMask local_mask(const Region& rg, int pad) {
  LocalMask lm{BinaryMask(rg.bbox.width() + 2 * pad, rg.bbox.height() + 2 * pad),
               {rg.bbox.x0 - pad, rg.bbox.y0 - pad}};
  for (const Point p : rg.pixels) lm.mask(p.x - lm.origin.x, p.y - lm.origin.y) = 1;
  return lm;
}

int neighbour_count(const BinaryMask& m, int x, int y) {
  int n = 0;
  for (int d = 0; d < 8; ++d) {
    const int qx = x + kDx[d], qy = y + kDy[d];
    if (m.contains(qx, qy) && m(qx, qy)) ++n;
  }
  return n;
}

// Zhang-Suen thinning; the mask frame must be unset.
void thin(BinaryMask& m) {
  const int w = m.width(), h = m.height();
  std::vector<std::size_t> kill;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      kill.clear();
      for (int y = 1; y < h - 1; ++y) {
        for (int x = 1; x < w - 1; ++x) {
          if (!m(x, y)) continue;
          // p2..p9 clockwise from north
          const int p[8] = {m(x, y - 1), m(x + 1, y - 1), m(x + 1, y), m(x + 1, y + 1),
                            m(x, y + 1), m(x - 1, y + 1), m(x - 1, y), m(x - 1, y - 1)};
          int b = 0, a = 0;
          for (int i = 0; i < 8; ++i) {
            b += p[i];
            if (!p[i] && p[(i + 1) % 8]) ++a;
          }
          if (b < 2 || b > 6 || a != 1) continue;
          if (pass == 0) {
            if (p[0] && p[2] && p[4]) continue;
            if (p[2] && p[4] && p[6]) continue;
          } else {
            if (p[0] && p[2] && p[6]) continue;
            if (p[0] && p[4] && p[6]) continue;
          }
          kill.push_back(static_cast<std::size_t>(y) * w + x);
        }
      }
      for (const std::size_t i : kill) m[i] = 0;
      if (!kill.empty()) changed = true;
    }
  }
  // Drop staircase corners that only duplicate 8-connectivity.
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      if (!m(x, y)) continue;
      const bool n = m(x, y - 1), s = m(x, y + 1), e = m(x + 1, y), wv = m(x - 1, y);
      const bool ne = m(x + 1, y - 1), nw = m(x - 1, y - 1), se = m(x + 1, y + 1), sw = m(x - 1, y + 1);
      if ((n && e && !s && !wv && !sw) || (n && wv && !s && !e && !se) || (s && e && !n && !wv && !nw) ||
          (s && wv && !n && !e && !ne))
        m(x, y) = 0;
    }
  }
}

// Ordered pixel path through an 8-connected set of simple-path pixels.
std::vector<Point> order_path(std::vector<Point> comp, const BinaryMask& member) {
  Point start = comp.front();
  for (const Point p : comp) {
    if (neighbour_count(member, p.x, p.y) <= 1) {
      start = p;
      break;
    }
  }
  BinaryMask seen(member.width(), member.height());
  std::vector<Point> path{start};
  seen(start.x, start.y) = 1;
  Point cur = start;
  while (true) {
    bool moved = false;
    // Prefer axial steps so that diagonal shortcuts do not skip pixels.
    for (const int d : {0, 2, 4, 6, 1, 3, 5, 7}) {
      const int qx = cur.x + kDx[d], qy = cur.y + kDy[d];
      if (member.contains(qx, qy) && member(qx, qy) && !seen(qx, qy)) {
        cur = {qx, qy};
        seen(qx, qy) = 1;
        path.push_back(cur);
        moved = true;
        break;
      }
    }
    if (!moved) break;
  }
  return path;
}

std::vector<std::vector<Point>> components(const BinaryMask& m) {
  const ComponentLabels cl = label_components(m);
  std::vector<std::vector<Point>> out(static_cast<std::size_t>(cl.count));
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (cl.ids(x, y) >= 0) out[static_cast<std::size_t>(cl.ids(x, y))].push_back({x, y});
  return out;
}

void prune_spurs(BinaryMask& skel, const PlaneMap& dist, const SymAxisOptions& opts) {
  for (int round = 0; round < 16; ++round) {
    std::vector<Point> doomed;
    for (int y = 0; y < skel.height(); ++y) {
      for (int x = 0; x < skel.width(); ++x) {
        if (!skel(x, y) || neighbour_count(skel, x, y) != 1) continue;
        std::vector<Point> branch{{x, y}};
        Point prev{-1, -1}, cur{x, y};
        bool at_junction = false;
        Point junction{};
        while (true) {
          Point next{-1, -1};
          for (int d = 0; d < 8; ++d) {
            const int qx = cur.x + kDx[d], qy = cur.y + kDy[d];
            if (!skel.contains(qx, qy) || !skel(qx, qy) || (Point{qx, qy} == prev)) continue;
            if (std::find(branch.begin(), branch.end(), Point{qx, qy}) != branch.end()) continue;
            next = {qx, qy};
            break;
          }
          if (next.x < 0) break;  // isolated path: not a spur
          if (neighbour_count(skel, next.x, next.y) >= 3) {
            at_junction = true;
            junction = next;
            break;
          }
          prev = cur;
          cur = next;
          branch.push_back(cur);
        }
        if (!at_junction) continue;
        const double len = chain_length(branch, false) + 1.0;
        const double limit = std::max(opts.spur_min, opts.spur_radius_ratio * dist(junction.x, junction.y));
        if (len < limit) doomed.insert(doomed.end(), branch.begin(), branch.end());
      }
    }
    if (doomed.empty()) return;
    for (const Point p : doomed) skel(p.x, p.y) = 0;
  }
}

double sample_gray(const PlaneMap* gray, Point origin, Point p) {
  if (!gray) return 0.0;
  const int x = p.x + origin.x, y = p.y + origin.y;
  return gray->contains(x, y) ? (*gray)(x, y) : 0.0;
}

}  // namespace

// ---- radial signature ----------------------------------------------------

RadialSignature radial_signature(const Region& rg) { return radial_signature(rg.boundary, rg.centroid); }

RadialSignature radial_signature(const std::vector<Point>& boundary, PointF c) {
  const std::size_t n = boundary.size();
  if (n < 8) throw DegenerateRegionError("region boundary has fewer than 8 pixels");
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = std::hypot(boundary[i].x - c.x, boundary[i].y - c.y);
    if (r[i] < 0.5) throw DegenerateRegionError("centroid lies on the region boundary");
  }
  // Canonical start: smallest angle from the +x axis, farther pixel first.
  std::size_t start = 0;
  auto key = [&](std::size_t i) {
    const double ang = std::abs(std::atan2(-(boundary[i].y - c.y), boundary[i].x - c.x));
    return std::make_tuple(ang, -r[i], boundary[i].y, boundary[i].x);
  };
  for (std::size_t i = 1; i < n; ++i)
    if (key(i) < key(start)) start = i;

  std::vector<double> cum(n + 1, 0.0), val(n + 1);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = (start + j) % n, k = (start + j + 1) % n;
    val[j] = r[i];
    const int dx = std::abs(boundary[i].x - boundary[k].x), dy = std::abs(boundary[i].y - boundary[k].y);
    cum[j + 1] = cum[j] + ((dx && dy) ? std::numbers::sqrt2 : static_cast<double>(dx + dy));
  }
  val[n] = val[0];
  const double total = cum[n];
  RadialSignature sig;
  sig.samples.resize(kSignatureSamples);
  std::size_t seg = 0;
  for (int s = 0; s < kSignatureSamples; ++s) {
    const double t = total * s / kSignatureSamples;
    while (seg + 1 < n && cum[seg + 1] <= t) ++seg;
    const double span = cum[seg + 1] - cum[seg];
    const double f = span > 0.0 ? (t - cum[seg]) / span : 0.0;
    sig.samples[static_cast<std::size_t>(s)] = val[seg] + f * (val[seg + 1] - val[seg]);
  }
  sig.mean_radius = mean_of(sig.samples);
  return sig;
}

std::array<double, kFourierTerms> fourier_magnitudes(std::span<const double> x) {
  const std::size_t n = x.size();
  std::array<double, kFourierTerms> out{};
  if (n == 0) return out;
  // Circular autocorrelation; each lag sums its products in sorted order.
  std::vector<double> acf(n), prod(n);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t i = 0; i < n; ++i) prod[i] = x[i] * x[(i + m) % n];
    std::sort(prod.begin(), prod.end());
    acf[m] = std::accumulate(prod.begin(), prod.end(), 0.0);
  }
  auto power = [&](std::size_t k) {
    double p = 0.0;
    for (std::size_t m = 0; m < n; ++m)
      p += acf[m] * std::cos(2.0 * std::numbers::pi * static_cast<double>((k * m) % n) / static_cast<double>(n));
    return std::sqrt(std::max(0.0, p));
  };
  const double dc = power(0);
  if (dc <= 0.0) return out;
  for (std::size_t k = 1; k <= kFourierTerms; ++k) out[k - 1] = power(k) / dc;
  return out;
}

std::array<double, 8> BoundaryDescriptor::values() const {
  return {extrema_count, extrema_mean_prominence, extrema_spacing_std, fourier[0],
          fourier[1],    fourier[2],              fourier[3],          fourier[4]};
}

BoundaryDescriptor boundary_descriptor(const RadialSignature& sig) {
  BoundaryDescriptor d;
  const auto& x = sig.samples;
  const std::size_t n = x.size();
  d.fourier = fourier_magnitudes(x);
  if (n < 3) return d;

  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int k = -2; k <= 2; ++k) acc += x[(i + n + static_cast<std::size_t>(k + static_cast<int>(n))) % n];
    s[i] = acc / 5.0;
  }
  const std::size_t rot = static_cast<std::size_t>(std::min_element(s.begin(), s.end()) - s.begin());
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = s[(rot + i) % n];
  if (v.front() == *std::max_element(v.begin(), v.end())) return d;  // flat

  std::vector<double> positions, prominences;
  for (std::size_t a = 1; a < n;) {
    std::size_t b = a;
    while (b + 1 < n && v[b + 1] == v[a]) ++b;
    const double hgt = v[a];
    const double left = v[a - 1], right = v[(b + 1) % n];
    if (left < hgt && right < hgt) {
      double lmin = hgt, rmin = hgt;
      for (std::size_t step = 1; step < n; ++step) {
        const double u = v[(a + n - step) % n];
        if (u > hgt) break;
        lmin = std::min(lmin, u);
      }
      for (std::size_t step = 1; step < n; ++step) {
        const double u = v[(b + step) % n];
        if (u > hgt) break;
        rmin = std::min(rmin, u);
      }
      const double prom = hgt - std::max(lmin, rmin);
      if (prom >= 0.05 * sig.mean_radius) {
        positions.push_back(0.5 * static_cast<double>(a + b));
        prominences.push_back(prom);
      }
    }
    a = b + 1;
  }
  d.extrema_count = static_cast<double>(positions.size());
  if (!prominences.empty() && sig.mean_radius > 0.0) d.extrema_mean_prominence = mean_of(prominences) / sig.mean_radius;
  if (positions.size() >= 2) {
    std::vector<double> gaps;
    for (std::size_t i = 0; i < positions.size(); ++i) {
      const double next = i + 1 < positions.size() ? positions[i + 1] : positions[0] + static_cast<double>(n);
      gaps.push_back((next - positions[i]) / static_cast<double>(n));
    }
    d.extrema_spacing_std = std_of(gaps);
  }
  return d;
}

// ---- pixel distribution ----------------------------------------------------

std::array<double, 8> DistributionDescriptor::values() const {
  return {solidity, compactness, silhouetteness, centrality, peripherality, coverage, hollowness, ringness};
}

DistributionDescriptor distribution_descriptor(const Region& rg, int width, int height) {
  const RegionStats st = region_stats(rg, width, height);
  DistributionDescriptor d;
  d.solidity = std::clamp(st.solidity, 0.0, 1.0);
  d.compactness = std::clamp(st.compactness, 0.0, 1.0);
  const double perimeter = rg.outer_perimeter + rg.hole_perimeter;
  d.silhouetteness = perimeter > 0.0 ? rg.outer_perimeter / perimeter : 1.0;
  d.centrality = st.centrality;
  d.peripherality = 1.0 - st.centrality;
  d.coverage = std::clamp(st.coverage, 0.0, 1.0);
  d.hollowness = static_cast<double>(rg.hole_area) / static_cast<double>(rg.area + rg.hole_area);
  const double a = static_cast<double>(rg.area);
  const double r_half = 0.5 * std::sqrt(a / std::numbers::pi);
  std::size_t inner = 0;
  for (const Point p : rg.pixels)
    if (std::hypot(p.x - rg.centroid.x, p.y - rg.centroid.y) <= r_half) ++inner;
  d.ringness = std::clamp(1.0 - static_cast<double>(inner) / (a / 4.0), 0.0, 1.0);
  return d;
}

std::array<double, 14> appearance_descriptor(const Region& rg, const RasterImage& img) {
  std::array<std::vector<double>, 6> ch;  // r, g, b, gray, chroma r, chroma g
  for (const Point p : rg.pixels) {
    const Rgb c = img.at(p.x, p.y);
    const double r = c[0], g = c[1], b = c[2], sum = r + g + b;
    ch[0].push_back(r);
    ch[1].push_back(g);
    ch[2].push_back(b);
    ch[3].push_back(sum / 3.0);
    ch[4].push_back(sum > 0 ? r / sum : 1.0 / 3.0);
    ch[5].push_back(sum > 0 ? g / sum : 1.0 / 3.0);
  }
  // Ring of width 3 around the region, clipped to the image.
  const int pad = 3;
  LocalMask lm = local_mask(rg, pad);
  const BinaryMask grown = dilate(lm.mask, pad);
  double ring[4] = {0, 0, 0, 0};
  std::size_t ring_n = 0;
  for (int y = 0; y < grown.height(); ++y)
    for (int x = 0; x < grown.width(); ++x) {
      if (!grown(x, y) || lm.mask(x, y)) continue;
      const int ix = x + lm.origin.x, iy = y + lm.origin.y;
      if (ix < 0 || iy < 0 || ix >= img.width() || iy >= img.height()) continue;
      const Rgb c = img.at(ix, iy);
      ring[0] += c[0];
      ring[1] += c[1];
      ring[2] += c[2];
      ++ring_n;
    }
  std::array<double, 14> out{};
  out[0] = mean_of(ch[0]);
  out[1] = mean_of(ch[1]);
  out[2] = mean_of(ch[2]);
  out[3] = std_of(ch[0]);
  out[4] = std_of(ch[1]);
  out[5] = std_of(ch[2]);
  out[6] = mean_of(ch[3]);
  out[7] = std_of(ch[3]);
  out[8] = mean_of(ch[4]);
  out[9] = std_of(ch[4]);
  out[10] = mean_of(ch[5]);
  out[11] = std_of(ch[5]);
  if (ring_n) {
    for (double& v : ring) v /= static_cast<double>(ring_n);
    out[12] = (ring[0] + ring[1] + ring[2]) / 3.0 - out[6];
    out[13] = std::sqrt((ring[0] - out[0]) * (ring[0] - out[0]) + (ring[1] - out[1]) * (ring[1] - out[1]) +
                        (ring[2] - out[2]) * (ring[2] - out[2]));
  }
  return out;
}

// ---- symmetric axis -------------------------------------------------------

SymAxis symmetric_axis(const Region& rg, const SymAxisOptions& opts) {
  LocalMask lm = local_mask(rg, 1);
  SymAxis ax{lm.origin, lm.mask, distance_transform(lm.mask)};
  thin(ax.skeleton);
  if (count_set(ax.skeleton) == 0) {
    // Thinning can erase tiny blobs; keep the deepest pixel.
    const auto it = std::max_element(ax.distance.values().begin(), ax.distance.values().end());
    ax.skeleton[static_cast<std::size_t>(it - ax.distance.values().begin())] = 1;
  }
  prune_spurs(ax.skeleton, ax.distance, opts);
  return ax;
}

SymAxisDescriptorSet sym_axis_descriptors(const Region& rg, const PlaneMap* gray, const SymAxisOptions& opts) {
  SymAxisDescriptorSet out;
  if (rg.area < opts.min_area) return out;
  const SymAxis ax = symmetric_axis(rg, opts);
  const BinaryMask& skel = ax.skeleton;
  const PlaneMap& dist = ax.distance;
  const int w = skel.width(), h = skel.height();

  BinaryMask junction(w, h), plain(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!skel(x, y)) continue;
      (neighbour_count(skel, x, y) >= 3 ? junction : plain)(x, y) = 1;
    }

  // Segments: skeleton with the junction pixels removed.
  const auto seg_comps = components(plain);
  Grid<int> seg_id(w, h, -1);
  std::vector<std::vector<Point>> paths;
  for (const auto& comp : seg_comps) {
    BinaryMask member(w, h);
    for (const Point p : comp) member(p.x, p.y) = 1;
    paths.push_back(order_path(comp, member));
    for (const Point p : comp) seg_id(p.x, p.y) = static_cast<int>(paths.size() - 1);
  }
  auto touches_junction = [&](Point p) {
    for (int d = 0; d < 8; ++d) {
      const int qx = p.x + kDx[d], qy = p.y + kDy[d];
      if (junction.contains(qx, qy) && junction(qx, qy)) return (d % 2) ? std::numbers::sqrt2 : 1.0;
    }
    return 0.0;
  };
  for (const auto& path : paths) {
    double length = chain_length(path, false);
    length += touches_junction(path.front());
    if (path.size() > 1) length += touches_junction(path.back());
    std::vector<double> radius, arc, inten;
    double pos = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i > 0) pos += chain_length({path[i - 1], path[i]}, false);
      radius.push_back(dist(path[i].x, path[i].y));
      arc.push_back(pos);
      inten.push_back(sample_gray(gray, ax.origin, path[i]));
    }
    double slope = 0.0;
    if (path.size() >= 2) {
      const double ma = mean_of(arc), mr = mean_of(radius);
      double sxy = 0.0, sxx = 0.0;
      for (std::size_t i = 0; i < arc.size(); ++i) {
        sxy += (arc[i] - ma) * (radius[i] - mr);
        sxx += (arc[i] - ma) * (arc[i] - ma);
      }
      slope = sxx > 0.0 ? sxy / sxx : 0.0;
    }
    const double chord = std::hypot(path.back().x - path.front().x, path.back().y - path.front().y);
    const double straight = pos > 0.0 ? std::min(1.0, chord / pos) : 1.0;
    const auto [lo, hi] = std::minmax_element(inten.begin(), inten.end());
    const double mean_r = mean_of(radius);
    AxisSegmentRow row{length, mean_r, slope, straight, mean_of(inten), *hi - *lo};
    (length < opts.short_factor * mean_r ? out.short_rows : out.long_rows).push_back(row);
  }

  // Forks: clusters of junction pixels with their arms.
  for (const auto& cluster : components(junction)) {
    std::vector<int> arms;
    std::vector<Point> arm_anchor;
    double cx = 0.0, cy = 0.0, r_branch = 0.0;
    std::vector<double> inten;
    for (const Point p : cluster) {
      cx += p.x;
      cy += p.y;
      r_branch = std::max(r_branch, dist(p.x, p.y));
      inten.push_back(sample_gray(gray, ax.origin, p));
      for (int d = 0; d < 8; ++d) {
        const int qx = p.x + kDx[d], qy = p.y + kDy[d];
        if (!seg_id.contains(qx, qy) || seg_id(qx, qy) < 0) continue;
        const int id = seg_id(qx, qy);
        if (std::find(arms.begin(), arms.end(), id) == arms.end()) {
          arms.push_back(id);
          arm_anchor.push_back({qx, qy});
        }
      }
    }
    if (arms.size() < 3) continue;
    cx /= static_cast<double>(cluster.size());
    cy /= static_cast<double>(cluster.size());
    double ux = 0.0, uy = 0.0;
    for (std::size_t i = 0; i < arms.size(); ++i) {
      const auto& path = paths[static_cast<std::size_t>(arms[i])];
      // Walk a few pixels away from the junction end of the arm.
      const bool from_front = path.front() == arm_anchor[i] ||
                              std::hypot(path.front().x - cx, path.front().y - cy) <=
                                  std::hypot(path.back().x - cx, path.back().y - cy);
      const std::size_t steps = std::min<std::size_t>(path.size() - 1, 5);
      const Point tip = from_front ? path[steps] : path[path.size() - 1 - steps];
      const double dx = tip.x - cx, dy = tip.y - cy, norm = std::hypot(dx, dy);
      if (norm > 0.0) {
        ux += dx / norm;
        uy += dy / norm;
      }
    }
    const double spread = 1.0 - std::hypot(ux, uy) / static_cast<double>(arms.size());
    out.forks.push_back({static_cast<double>(arms.size()), spread, r_branch, mean_of(inten)});
  }

  // Peaks: compact plateaus of the distance map on the skeleton whose
  // skeleton neighbours are all lower.
  BinaryMask visited(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!skel(x, y) || visited(x, y)) continue;
      const double v = dist(x, y);
      std::vector<Point> plateau{{x, y}}, stack{{x, y}};
      visited(x, y) = 1;
      bool is_peak = true;
      while (!stack.empty()) {
        const Point p = stack.back();
        stack.pop_back();
        for (int d = 0; d < 8; ++d) {
          const int qx = p.x + kDx[d], qy = p.y + kDy[d];
          if (!skel.contains(qx, qy) || !skel(qx, qy)) continue;
          if (dist(qx, qy) > v) is_peak = false;
          if (dist(qx, qy) == v && !visited(qx, qy)) {
            visited(qx, qy) = 1;
            plateau.push_back({qx, qy});
            stack.push_back({qx, qy});
          }
        }
      }
      if (!is_peak || static_cast<double>(plateau.size()) > std::max(2.0, v)) continue;
      double px = 0.0, py = 0.0;
      for (const Point p : plateau) {
        px += p.x;
        py += p.y;
      }
      px /= static_cast<double>(plateau.size());
      py /= static_cast<double>(plateau.size());
      // Isotropy of the region within twice the peak radius.
      const double reach = 2.0 * v;
      double mx = 0.0, my = 0.0, n = 0.0;
      std::vector<double> inten;
      std::vector<PointF> near;
      for (int yy = std::max(0, static_cast<int>(py - reach)); yy <= std::min(h - 1, static_cast<int>(py + reach)); ++yy)
        for (int xx = std::max(0, static_cast<int>(px - reach)); xx <= std::min(w - 1, static_cast<int>(px + reach)); ++xx) {
          if (!dist(xx, yy)) continue;
          const double r = std::hypot(xx - px, yy - py);
          if (r > reach) continue;
          near.push_back({static_cast<double>(xx), static_cast<double>(yy)});
          mx += xx;
          my += yy;
          n += 1.0;
          if (r <= v) inten.push_back(sample_gray(gray, ax.origin, {xx, yy}));
        }
      double iso = 1.0;
      if (n > 1.0) {
        mx /= n;
        my /= n;
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (const PointF q : near) {
          sxx += (q.x - mx) * (q.x - mx);
          syy += (q.y - my) * (q.y - my);
          sxy += (q.x - mx) * (q.y - my);
        }
        const double tr = sxx + syy, det = sxx * syy - sxy * sxy;
        const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
        const double l1 = tr / 2.0 + disc, l2 = tr / 2.0 - disc;
        iso = l1 > 0.0 ? std::max(0.0, l2) / l1 : 1.0;
      }
      out.peaks.push_back({v, iso, mean_of(inten)});
    }
  }
  return out;
}

}  // namespace lesion::shape
