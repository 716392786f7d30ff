#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "lesionkit/threshold.hpp"
#include "oracles.hpp"

using namespace lesion;
using namespace lesion::threshold;

namespace {

// Normal quantiles by bisection on erfc, so the "samples" are exact.
double normal_quantile(double p) {
  double lo = -10.0, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

PlaneMap mixture_plane(const std::vector<double>& means, double sigma, int per_mode) {
  std::vector<double> v;
  for (const double m : means)
    for (int i = 0; i < per_mode; ++i) v.push_back(m + sigma * normal_quantile((i + 0.5) / per_mode));
  return PlaneMap(static_cast<int>(v.size()), 1, v);
}

}  // namespace

TEST_CASE("build_histogram") {
  const Histogram flat = build_histogram(PlaneMap(10, 10, 100.0), 64);
  CHECK(std::count_if(flat.counts.begin(), flat.counts.end(), [](long long c) { return c > 0; }) == 1);
  CHECK(std::accumulate(flat.counts.begin(), flat.counts.end(), 0LL) == 100);

  std::vector<double> v(100, 0.0);
  std::fill(v.begin() + 50, v.end(), 255.0);
  const Histogram two = build_histogram(PlaneMap(100, 1, v), 2);
  CHECK(two.counts == std::vector<long long>{50, 50});

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const int w = 1 + static_cast<int>(rng.index(30)), h = 1 + static_cast<int>(rng.index(30));
    PlaneMap p(w, h);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::floor(rng.uniform(0.0, 256.0));
    const Histogram hist = build_histogram(p, 64);
    CHECK(std::accumulate(hist.counts.begin(), hist.counts.end(), 0LL) == static_cast<long long>(w * h));
    for (std::size_t i = 1; i < hist.edges.size(); ++i) CHECK(hist.edges[i] > hist.edges[i - 1]);
    // Counting oracle.
    for (std::size_t b = 0; b < hist.bins(); ++b) {
      long long n = 0;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const bool last = b + 1 == hist.bins();
        if (p[i] >= hist.edges[b] && (p[i] < hist.edges[b + 1] || (last && p[i] <= hist.edges[b + 1]))) ++n;
      }
      CHECK(hist.counts[b] == n);
    }
  }
  CHECK_THROWS(build_histogram(PlaneMap(2, 2), 1));
}

TEST_CASE("find_peaks") {
  const PlaneMap bi = mixture_plane({60.0, 180.0}, 10.0, 5000);
  const Histogram hb = build_histogram(bi, 64);
  const auto peaks = find_peaks(hb, 3, 0.05);
  REQUIRE(peaks.size() == 2);
  std::vector<double> centers = {peaks[0].center, peaks[1].center};
  std::sort(centers.begin(), centers.end());
  CHECK(std::abs(centers[0] - 60.0) <= hb.bin_width());
  CHECK(std::abs(centers[1] - 180.0) <= hb.bin_width());
  for (const Peak& p : peaks) CHECK(p.width > 0.0);
  CHECK(peaks[0].prominence >= peaks[1].prominence);

  const auto uni = find_peaks(build_histogram(mixture_plane({100.0}, 12.0, 5000), 64), 3, 0.05);
  CHECK(uni.size() == 1);

  Histogram uniform;
  for (int i = 0; i <= 64; ++i) uniform.edges.push_back(i * 4.0);
  uniform.counts.assign(64, 100);
  CHECK(find_peaks(uniform, 3, 0.05).empty());

  // Width of a Gaussian peak: full width at half prominence, about 2.355 sigma.
  CHECK(uni[0].width == doctest::Approx(2.355 * 12.0).epsilon(0.2));
}

TEST_CASE("band_threshold") {
  const PlaneMap p(3, 1, std::vector<double>{50.0, 100.0, 150.0});
  const BinaryMask m = band_threshold(p, Peak{100.0, 40.0, 1.0});
  CHECK(m == BinaryMask(3, 1, std::vector<std::uint8_t>{0, 1, 0}));
  CHECK(count_set(band_threshold(p, Peak{100.0, 1000.0, 1.0})) == 3);
  CHECK(count_set(band_threshold(p, Peak{300.0, 10.0, 1.0})) == 0);

  // Non-overlapping bands give disjoint maps.
  Rng rng(5);
  PlaneMap q(20, 20);
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = rng.uniform(0.0, 255.0);
  const BinaryMask a = band_threshold(q, Peak{60.0, 30.0, 1.0}), b = band_threshold(q, Peak{100.0, 30.0, 1.0});
  for (std::size_t i = 0; i < a.size(); ++i) CHECK_FALSE((a[i] && b[i]));
}

TEST_CASE("threshold_candidates: dark disk on skin") {
  const BinaryMask disk = oracle::disk_mask(100, 100, 49.5, 49.5, 20);
  const RasterImage img = testutil::paint(disk, {60, 60, 60}, {200, 200, 200});
  const auto cands = threshold_candidates(img, ThresholdConfig{});
  double best_iou = 0.0;
  for (const CandidateRegion& c : cands) {
    CHECK(c.confidence >= 0.0);
    if (c.source == SourceType::Gray) best_iou = std::max(best_iou, testutil::iou(testutil::mask_of(*c.region), disk));
  }
  CHECK(best_iou >= 0.9);
  // The top gray candidate is the disk, not the frame-touching background.
  const CandidateRegion* top = nullptr;
  for (const CandidateRegion& c : cands)
    if (c.source == SourceType::Gray && (!top || c.confidence > top->confidence)) top = &c;
  REQUIRE(top);
  CHECK(testutil::iou(testutil::mask_of(*top->region), disk) >= 0.9);

  CHECK(threshold_candidates(RasterImage(50, 40, Rgb{120, 90, 80}), ThresholdConfig{}).empty());
}

TEST_CASE("threshold_candidates: centered disk beats corner disk") {
  BinaryMask two = oracle::disk_mask(120, 120, 59.5, 59.5, 16);
  const BinaryMask corner = oracle::disk_mask(120, 120, 20.5, 20.5, 16);
  for (std::size_t i = 0; i < two.size(); ++i) two[i] |= corner[i];
  const auto cands = threshold_candidates(testutil::paint(two, {50, 50, 50}, {210, 210, 210}), ThresholdConfig{});
  double centered = -1.0, cornered = -1.0;
  for (const CandidateRegion& c : cands) {
    if (c.source != SourceType::Gray || c.region->area != count_set(corner)) continue;
    (c.region->centroid.x > 40 ? centered : cornered) = c.confidence;
  }
  REQUIRE(centered > 0.0);
  REQUIRE(cornered > 0.0);
  CHECK(centered > cornered);
}

TEST_CASE("basic confidence is c times a") {
  // 8 x 10 block centered in a 20 x 20 image: c = 1, a = 0.2.
  const Region rg = connected_regions(oracle::rect_mask(20, 20, 6, 5, 13, 14), 1).at(0);
  CHECK(basic_confidence(rg, BorderRule{}) == doctest::Approx(0.2));
  // Same area, farther from the center: strictly lower.
  const Region off = connected_regions(oracle::rect_mask(20, 20, 2, 3, 9, 12), 1).at(0);
  CHECK(basic_confidence(off, BorderRule{}) < basic_confidence(rg, BorderRule{}));
  // Same centroid, larger: strictly higher.
  const Region big = connected_regions(oracle::rect_mask(20, 20, 5, 4, 14, 15), 1).at(0);
  CHECK(basic_confidence(big, BorderRule{}) > basic_confidence(rg, BorderRule{}));
}

TEST_CASE("border rule") {
  const BorderRule rule{};
  const Region inner = connected_regions(oracle::rect_mask(20, 20, 5, 5, 14, 14), 1).at(0);
  CHECK(border_factor(inner, rule) == 1.0);
  // One side on the frame: about a quarter of the boundary.
  const Region side = connected_regions(oracle::rect_mask(20, 20, 0, 5, 9, 14), 1).at(0);
  CHECK(border_factor(side, rule) == rule.penalty);
  // Background around a lesion covers most of the frame.
  BinaryMask skin(20, 20, std::uint8_t{1});
  for (int y = 5; y < 15; ++y)
    for (int x = 5; x < 15; ++x) skin(x, y) = 0;
  CHECK(border_factor(connected_regions(skin, 1).at(0), rule) == rule.frame_penalty);
}

TEST_CASE("L ordering survives uniform brightening") {
  BinaryMask m = oracle::disk_mask(80, 80, 40, 38, 12);
  const BinaryMask other = oracle::rect_mask(80, 80, 5, 60, 20, 70);
  for (std::size_t i = 0; i < m.size(); ++i) m[i] |= other[i];
  auto ranked = [&](int shift) {
    const RasterImage img = testutil::paint(m, {static_cast<std::uint8_t>(40 + shift), static_cast<std::uint8_t>(40 + shift),
                                                static_cast<std::uint8_t>(40 + shift)},
                                            {static_cast<std::uint8_t>(180 + shift), static_cast<std::uint8_t>(180 + shift),
                                             static_cast<std::uint8_t>(180 + shift)});
    auto c = plane_candidates(to_planes(img).gray, SourceType::Gray, ThresholdConfig{});
    std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) { return a.confidence > b.confidence; });
    std::vector<std::vector<Point>> order;
    for (const auto& x : c) order.push_back(x.region->pixels);
    return order;
  };
  CHECK(ranked(0) == ranked(30));
}
