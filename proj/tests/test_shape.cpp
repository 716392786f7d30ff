#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "lesionkit/shape.hpp"
#include "oracles.hpp"

using namespace lesion;
using namespace lesion::shape;

namespace {

Region only_region(const BinaryMask& m) {
  auto rs = connected_regions(m, 1);
  REQUIRE(rs.size() == 1);
  return rs[0];
}

/// Pixels within `half` of the segment a-b.
void stroke(BinaryMask& m, PointF a, PointF b, double half) {
  const double vx = b.x - a.x, vy = b.y - a.y, len2 = vx * vx + vy * vy;
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) {
      const double t = std::clamp(((x - a.x) * vx + (y - a.y) * vy) / len2, 0.0, 1.0);
      if (std::hypot(x - (a.x + t * vx), y - (a.y + t * vy)) <= half) m(x, y) = 1;
    }
}

BinaryMask y_shape(int size, double cx, double cy, double arm, double half) {
  BinaryMask m(size, size);
  for (const double deg : {90.0, 210.0, 330.0}) {
    const double t = deg * std::numbers::pi / 180.0;
    stroke(m, {cx, cy}, {cx + arm * std::cos(t), cy - arm * std::sin(t)}, half);
  }
  return m;
}

BinaryMask upscale2(const BinaryMask& m) {
  BinaryMask out(2 * m.width(), 2 * m.height());
  for (int y = 0; y < out.height(); ++y)
    for (int x = 0; x < out.width(); ++x) out(x, y) = m(x / 2, y / 2);
  return out;
}

}  // namespace

TEST_CASE("radial_signature: circle and square") {
  const Region circle = only_region(oracle::disk_mask(61, 61, 30, 30, 20));
  const RadialSignature cs = radial_signature(circle);
  REQUIRE(cs.samples.size() == kSignatureSamples);
  for (const double v : cs.samples) CHECK(std::abs(v - 20.0) <= 1.0);

  const Region square = only_region(oracle::rect_mask(60, 60, 10, 10, 49, 49));
  const RadialSignature ss = radial_signature(square);
  const double s = 19.5;
  for (const double v : ss.samples) {
    CHECK(v >= s - 0.5);
    CHECK(v <= s * std::sqrt(2.0) + 0.5);
  }
  CHECK(boundary_descriptor(ss).extrema_count == 4.0);

  BinaryMask tiny(5, 5);
  tiny(1, 1) = tiny(2, 1) = tiny(3, 1) = 1;
  CHECK_THROWS_AS(radial_signature(only_region(tiny)), DegenerateRegionError);
}

TEST_CASE("boundary_descriptor") {
  const BoundaryDescriptor c = boundary_descriptor(radial_signature(only_region(oracle::disk_mask(61, 61, 30, 30, 20))));
  CHECK(c.extrema_count == 0.0);
  for (const double f : c.fourier) CHECK(f < 0.05);

  const BoundaryDescriptor sq =
      boundary_descriptor(radial_signature(only_region(oracle::rect_mask(60, 60, 10, 10, 49, 49))));
  CHECK(sq.extrema_count == 4.0);
  for (int k = 0; k < kFourierTerms; ++k)
    if (k != 3) CHECK(sq.fourier[3] > sq.fourier[static_cast<std::size_t>(k)]);
  for (const double v : sq.values()) CHECK(std::isfinite(v));
}

TEST_CASE("Fourier magnitudes are exactly shift invariant") {
  Rng rng(31);
  for (int t = 0; t < 50; ++t) {
    const BinaryMask m = testutil::random_blob(rng);
    const auto rs = connected_regions(m, 1);
    for (const Region& r : rs) {
      RadialSignature sig;
      try {
        sig = radial_signature(r);
      } catch (const DegenerateRegionError&) {
        continue;
      }
      const BoundaryDescriptor d0 = boundary_descriptor(sig);
      for (const int shift : {1, 17, 64, 127}) {
        RadialSignature rot = sig;
        std::rotate(rot.samples.begin(), rot.samples.begin() + shift, rot.samples.end());
        const BoundaryDescriptor d1 = boundary_descriptor(rot);
        CHECK(d1.fourier == d0.fourier);
        CHECK(d1.extrema_count == d0.extrema_count);
      }
    }
  }
}

TEST_CASE("radial signature scales with the region") {
  Rng rng(32);
  int checked = 0;
  for (int t = 0; t < 40; ++t) {
    // Centered blob that stays clear of the frame.
    BinaryMask m = testutil::random_blob(rng);
    BinaryMask framed(m.width() + 80, m.height() + 80);
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x) framed(x + 40, y + 40) = m(x, y);
    m = framed;
    const auto rs = connected_regions(m, 1);
    if (rs.size() != 1 || rs[0].area < 60 || rs[0].holes) continue;
    double r1 = 0.0;
    try {
      r1 = radial_signature(rs[0]).mean_radius;
    } catch (const DegenerateRegionError&) {
      continue;  // centroid outside a strongly concave blob
    }
    const double r2 = radial_signature(only_region(upscale2(m))).mean_radius;
    CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.05));
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("distribution_descriptor") {
  const Region disk = only_region(oracle::disk_mask(101, 101, 50, 50, 25));
  const DistributionDescriptor d = distribution_descriptor(disk, 101, 101);
  CHECK(d.solidity == doctest::Approx(1.0).epsilon(0.1));
  CHECK(d.compactness == doctest::Approx(1.0).epsilon(0.1));
  CHECK(d.hollowness == 0.0);
  CHECK(d.ringness <= 0.1);
  CHECK(d.silhouetteness == 1.0);
  CHECK(d.centrality + d.peripherality == doctest::Approx(1.0));

  BinaryMask ring = oracle::disk_mask(101, 101, 50, 50, 30);
  const BinaryMask hole = oracle::disk_mask(101, 101, 50, 50, 24);
  for (std::size_t i = 0; i < ring.size(); ++i)
    if (hole[i]) ring[i] = 0;
  const DistributionDescriptor a = distribution_descriptor(only_region(ring), 101, 101);
  CHECK(a.hollowness > 0.5);
  CHECK(a.ringness == doctest::Approx(1.0).epsilon(0.05));
  CHECK(a.silhouetteness < 0.6);

  CHECK(distribution_descriptor(only_region(oracle::rect_mask(30, 30, 3, 4, 20, 9)), 30, 30).solidity == 1.0);
}

TEST_CASE("distribution fields stay in [0, 1] on random blobs") {
  Rng rng(33);
  int n = 0;
  while (n < 1000) {
    const BinaryMask m = testutil::random_blob(rng);
    for (const Region& r : connected_regions(m, 1)) {
      for (const double v : distribution_descriptor(r, m.width(), m.height()).values()) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
      }
      ++n;
    }
  }
}

TEST_CASE("appearance_descriptor") {
  const BinaryMask disk = oracle::disk_mask(40, 40, 20, 20, 8);
  const RasterImage img = testutil::paint(disk, {90, 60, 30}, {200, 200, 200});
  const auto a = appearance_descriptor(only_region(disk), img);
  CHECK(a[0] == doctest::Approx(90.0));
  CHECK(a[3] == doctest::Approx(0.0));
  CHECK(a[6] == doctest::Approx(60.0));
  CHECK(a[12] == doctest::Approx(140.0));  // ring is brighter
  for (const double v : a) CHECK(std::isfinite(v));
}

TEST_CASE("sym_axis_descriptors: rectangle") {
  const Region rect = only_region(oracle::rect_mask(120, 30, 10, 10, 109, 19));
  const SymAxisDescriptorSet s = sym_axis_descriptors(rect);
  REQUIRE_FALSE(s.long_rows.empty());
  const auto longest = *std::max_element(s.long_rows.begin(), s.long_rows.end(),
                                         [](const auto& a, const auto& b) { return a[0] < b[0]; });
  CHECK(longest[0] == doctest::Approx(90.0).epsilon(5.0 / 90.0));
  CHECK(std::abs(longest[1] - 5.0) <= 1.0);
  CHECK(s.forks.empty());
}

TEST_CASE("sym_axis_descriptors: disk") {
  const Region disk = only_region(oracle::disk_mask(61, 61, 30, 30, 15));
  const SymAxisDescriptorSet s = sym_axis_descriptors(disk);
  CHECK(s.long_rows.empty());
  REQUIRE_FALSE(s.peaks.empty());
  double best = 0.0;
  for (const auto& p : s.peaks) best = std::max(best, p[0]);
  CHECK(std::abs(best - 15.0) <= 1.0);
  for (const auto& p : s.peaks) CHECK(p[0] >= 0.0);
}

TEST_CASE("sym_axis_descriptors: Y shape") {
  const BinaryMask y = y_shape(100, 50, 50, 35, 5);
  const SymAxisDescriptorSet s = sym_axis_descriptors(only_region(y));
  REQUIRE(s.forks.size() == 1);
  CHECK(s.forks[0][0] == 3.0);

  // Fork arm count under 90 degree rotation.
  BinaryMask rot(100, 100);
  for (int yy = 0; yy < 100; ++yy)
    for (int x = 0; x < 100; ++x) rot(99 - yy, x) = y(x, yy);
  const SymAxisDescriptorSet r = sym_axis_descriptors(only_region(rot));
  REQUIRE(r.forks.size() == 1);
  CHECK(r.forks[0][0] == 3.0);
}

TEST_CASE("sym_axis_descriptors: small and translated regions") {
  const Region small = only_region(oracle::rect_mask(10, 10, 2, 2, 5, 5));
  const SymAxisDescriptorSet e = sym_axis_descriptors(small);
  CHECK(e.short_rows.empty());
  CHECK(e.long_rows.empty());
  CHECK(e.forks.empty());
  CHECK(e.peaks.empty());

  auto total = [](const SymAxisDescriptorSet& s) {
    double t = 0.0;
    for (const auto& r : s.short_rows) t += r[0];
    for (const auto& r : s.long_rows) t += r[0];
    return t;
  };
  Rng rng(34);
  for (int t = 0; t < 20; ++t) {
    const BinaryMask m = testutil::random_blob(rng);
    BinaryMask shifted(m.width() + 7, m.height() + 4);
    for (int y = 0; y < m.height(); ++y)
      for (int x = 0; x < m.width(); ++x) shifted(x + 7, y + 4) = m(x, y);
    const auto a = connected_regions(m, 1), b = connected_regions(shifted, 1);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].touches_border) continue;  // the frame distance changes with the shift
      CHECK(total(sym_axis_descriptors(a[i])) == doctest::Approx(total(sym_axis_descriptors(b[i]))));
    }
  }
}

TEST_CASE("sym-axis rows are well formed") {
  Rng rng(35);
  for (int t = 0; t < 60; ++t) {
    const BinaryMask m = testutil::random_blob(rng);
    PlaneMap gray(m.width(), m.height(), 100.0);
    for (const Region& r : connected_regions(m, 1)) {
      const SymAxisDescriptorSet s = sym_axis_descriptors(r, &gray);
      for (const auto& row : s.short_rows) CHECK(row[1] >= 0.0);
      for (const auto& row : s.long_rows) CHECK(row[1] >= 0.0);
      for (const auto& f : s.forks) CHECK(f[0] >= 3.0);
      for (const auto& p : s.peaks) {
        CHECK(p[0] >= 0.0);
        CHECK(p[2] == 100.0);
      }
    }
  }
}
