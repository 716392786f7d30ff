#include "lesionkit/threshold.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace lesion {

namespace {
constexpr std::array<std::string_view, kSourceCount> kSourceNames = {
    "gray", "red", "green", "blue", "kmeans-ity", "kmeans-cra", "kmeans-hull"};
}

std::string_view source_name(SourceType t) { return kSourceNames[static_cast<std::size_t>(t)]; }

SourceType source_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kSourceNames.size(); ++i)
    if (kSourceNames[i] == name) return static_cast<SourceType>(i);
  throw DataError("unknown candidate source '" + std::string(name) + "'");
}

namespace threshold {

Histogram build_histogram(const PlaneMap& plane, int bins) {
  if (bins < 2) throw DataError("histogram needs at least 2 bins");
  const auto [lo_it, hi_it] = std::minmax_element(plane.values().begin(), plane.values().end());
  double lo = *lo_it, hi = *hi_it;
  if (hi <= lo) hi = lo + 1.0;
  Histogram h;
  h.edges.resize(static_cast<std::size_t>(bins) + 1);
  h.counts.assign(static_cast<std::size_t>(bins), 0);
  const double width = (hi - lo) / bins;
  for (int i = 0; i <= bins; ++i) h.edges[static_cast<std::size_t>(i)] = lo + width * i;
  h.edges.back() = hi;
  for (const double v : plane.values()) {
    auto i = static_cast<long long>(std::floor((v - lo) / width));
    i = std::clamp<long long>(i, 0, bins - 1);
    ++h.counts[static_cast<std::size_t>(i)];
  }
  return h;
}

std::vector<Peak> find_peaks(const Histogram& h, int smoothing, double min_prominence_frac) {
  const auto n = static_cast<long long>(h.bins());
  const long long half = smoothing > 1 ? smoothing / 2 : 0;
  std::vector<double> s(static_cast<std::size_t>(n), 0.0);
  for (long long i = 0; i < n; ++i) {
    // The window shrinks at the ends so a flat histogram stays flat.
    double acc = 0.0, used = 0.0;
    for (long long j = i - half; j <= i + half; ++j)
      if (j >= 0 && j < n) {
        acc += static_cast<double>(h.counts[static_cast<std::size_t>(j)]);
        used += 1.0;
      }
    s[static_cast<std::size_t>(i)] = acc / used;
  }
  // Outside the histogram counts as zero.
  auto at = [&](long long i) { return (i < 0 || i >= n) ? 0.0 : s[static_cast<std::size_t>(i)]; };
  const double top = *std::max_element(s.begin(), s.end());
  std::vector<Peak> peaks;
  if (top <= 0.0) return peaks;

  for (long long a = 0; a < n;) {
    long long b = a;
    while (b + 1 < n && at(b + 1) == at(a)) ++b;
    const double height = at(a);
    const bool whole = a == 0 && b == n - 1;
    if (!whole && height > 0.0 && at(a - 1) < height && at(b + 1) < height) {
      // Prominence against the lowest point before a higher sample (or the edge).
      long long li = a - 1, lmin_i = a - 1;
      double lmin = at(a - 1);
      while (li >= -1 && at(li) <= height) {
        if (at(li) < lmin) {
          lmin = at(li);
          lmin_i = li;
        }
        if (li == -1) break;
        --li;
      }
      long long ri = b + 1, rmin_i = b + 1;
      double rmin = at(b + 1);
      while (ri <= n && at(ri) <= height) {
        if (at(ri) < rmin) {
          rmin = at(ri);
          rmin_i = ri;
        }
        if (ri == n) break;
        ++ri;
      }
      const double prominence = height - std::max(lmin, rmin);
      if (prominence > 0.0 && prominence >= min_prominence_frac * top) {
        const double level = height - 0.5 * prominence;
        double left = static_cast<double>(lmin_i);
        for (long long j = a - 1; j >= lmin_i; --j) {
          if (at(j) < level) {
            left = static_cast<double>(j) + (level - at(j)) / (at(j + 1) - at(j));
            break;
          }
        }
        double right = static_cast<double>(rmin_i);
        for (long long j = b + 1; j <= rmin_i; ++j) {
          if (at(j) < level) {
            right = static_cast<double>(j) - (level - at(j)) / (at(j - 1) - at(j));
            break;
          }
        }
        const long long lo = std::clamp<long long>(static_cast<long long>(std::ceil(left)), 0, n - 1);
        const long long hi = std::clamp<long long>(static_cast<long long>(std::floor(right)), 0, n - 1);
        long long best = std::clamp<long long>((a + b) / 2, 0, n - 1);
        for (long long j = lo; j <= hi; ++j)
          if (h.counts[static_cast<std::size_t>(j)] > h.counts[static_cast<std::size_t>(best)]) best = j;
        Peak p;
        p.center = h.bin_center(static_cast<std::size_t>(best));
        p.width = std::max(right - left, 1.0) * h.bin_width();
        p.prominence = prominence;
        peaks.push_back(p);
      }
    }
    a = b + 1;
  }
  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const Peak& x, const Peak& y) { return x.prominence > y.prominence; });
  return peaks;
}

BinaryMask band_threshold(const PlaneMap& plane, const Peak& p) {
  const double lo = p.center - 0.5 * p.width, hi = p.center + 0.5 * p.width;
  BinaryMask m(plane.width(), plane.height());
  for (std::size_t i = 0; i < plane.size(); ++i) m[i] = (plane[i] >= lo && plane[i] <= hi) ? 1 : 0;
  return m;
}

double border_factor(const Region& rg, const BorderRule& rule) {
  if (rg.border_fraction > rule.frame_touch_frac || rg.frame_coverage > rule.frame_cover_frac)
    return rule.frame_penalty;
  if (rg.border_fraction > rule.touch_frac) return rule.penalty;
  return 1.0;
}

double basic_confidence(const Region& rg, const BorderRule& rule) {
  const double c = centrality(rg.centroid, rg.image_width, rg.image_height);
  const double a = static_cast<double>(rg.area) / (static_cast<double>(rg.image_width) * rg.image_height);
  return c * a * border_factor(rg, rule);
}

std::vector<CandidateRegion> plane_candidates(const PlaneMap& plane, SourceType source,
                                              const ThresholdConfig& cfg) {
  const Histogram h = build_histogram(plane, cfg.bins);
  std::vector<Peak> peaks = find_peaks(h, cfg.smoothing, cfg.min_prominence_frac);
  if (cfg.max_peaks > 0 && peaks.size() > static_cast<std::size_t>(cfg.max_peaks))
    peaks.resize(static_cast<std::size_t>(cfg.max_peaks));
  const std::size_t min_area = cfg.min_area ? cfg.min_area : default_min_area(plane.width(), plane.height());
  std::vector<CandidateRegion> out;
  for (const Peak& p : peaks) {
    for (Region& rg : connected_regions(close(band_threshold(plane, p), cfg.closing), min_area)) {
      if (rg.area == plane.size()) continue;  // no figure/ground split
      const double L = basic_confidence(rg, cfg.border);
      if (L < cfg.min_confidence) continue;
      CandidateRegion cand;
      cand.source = source;
      cand.confidence = L;
      cand.aux["peak_center"] = p.center;
      cand.aux["peak_width"] = p.width;
      cand.region = std::make_shared<const Region>(std::move(rg));
      out.push_back(std::move(cand));
    }
  }
  return out;
}

std::vector<CandidateRegion> threshold_candidates(const RasterImage& img, const ThresholdConfig& cfg) {
  const Planes planes = to_planes(img);
  std::vector<CandidateRegion> out;
  const std::pair<const PlaneMap*, SourceType> jobs[] = {{&planes.gray, SourceType::Gray},
                                                         {&planes.red, SourceType::Red},
                                                         {&planes.green, SourceType::Green},
                                                         {&planes.blue, SourceType::Blue}};
  for (const auto& [plane, source] : jobs) {
    auto c = plane_candidates(*plane, source, cfg);
    std::move(c.begin(), c.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace threshold
}  // namespace lesion
