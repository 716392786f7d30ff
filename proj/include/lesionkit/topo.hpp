#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "lesionkit/image.hpp"
#include "lesionkit/region.hpp"
#include "lesionkit/shape.hpp"

namespace lesion::topo {

inline constexpr int kContourAttributes = 15;
inline constexpr int kGroupAttributes = 19;

struct ScalePair {
  PlaneMap blur1;  // sigma 1
  PlaneMap blur2;  // sigma 2
  PlaneMap dog;    // blur1 - blur2
};

/// Separable Gaussian with radius ceil(3 sigma) and mirrored borders. Kernel
/// taps are rounded to multiples of 2^-20 and sum to exactly 1, so blurring
/// integer-valued planes is exact and commutes with inversion.
PlaneMap gaussian_blur(const PlaneMap& plane, double sigma);
ScalePair scale_pair(const PlaneMap& gray);

enum class ContourKind { Ridge, River, Edge };
std::string_view kind_name(ContourKind k);

struct RawContour {
  ContourKind kind = ContourKind::Ridge;
  int scale = 1;
  std::vector<Point> points;
};

struct ContourOptions {
  double high_percentile = 0.8;
  double low_percentile = 0.4;
  std::size_t min_chain = 4;
};

/// Ridge pixels: maxima across the direction of strongest negative
/// curvature. Rivers use the negated plane. Strengths (-lambda_min or the
/// gradient magnitude) are linked by hysteresis between two percentiles of
/// the candidate strengths.
BinaryMask ridge_mask(const PlaneMap& blurred, const ContourOptions& opts = {});
BinaryMask edge_mask(const PlaneMap& blurred, const ContourOptions& opts = {});

/// Orders the pixels of a thin mask into chains, endpoints first, then loops.
std::vector<std::vector<Point>> link_chains(const BinaryMask& mask, std::size_t min_chain);

/// Ridge, river and edge chains of both scales, in that order.
std::vector<RawContour> extract_contours(const ScalePair& sp, const ContourOptions& opts = {});

/// Attribute order:
///   0 arc length, 1 curvature mean, 2 curvature std, 3 jaggedness,
///   4 straightness, 5 orientation, 6 endpoint distance, 7 bbox elongation,
///   8 turn count, 9 mean intensity, 10 mean local range, 11 intensity std,
///   12 mean R, 13 mean G, 14 mean B
struct ContourSegment {
  ContourKind kind = ContourKind::Ridge;
  int scale = 1;
  std::vector<Point> points;
  std::array<double, kContourAttributes> attributes{};

  double length() const { return attributes[0]; }
  double orientation() const { return attributes[5]; }
  PointF midpoint() const;
};

/// Recursive chord splitting: a piece is cut at its farthest point from the
/// chord when that distance exceeds max(10% of the chord, 1 px).
std::vector<std::vector<Point>> partition_chain(const std::vector<Point>& chain);
std::vector<ContourSegment> partition_and_describe(const RawContour& raw, const RasterImage& img,
                                                   const PlaneMap& gray);
std::vector<ContourSegment> partition_and_describe(const RawContour& raw, const RasterImage& img);

struct OrientationScores {
  double uni = 0.0;
  double null = 0.0;
  double cross = 0.0;
};
/// Axial orientations in radians; uni = |mean e^{2i theta}|,
/// cross = max(0, |mean e^{4i theta}| - uni), null = 1 - max of the two.
OrientationScores orientation_scores(const std::vector<double>& orientations);

enum class GroupKind { Clot, BundleTight, BundleLoose };

/// Attribute order:
///   0..3 min/max/mean/std member distance from the pole,
///   4..5 mean/std member length, 6 member count,
///   7 pole spread (mean distance / mean length), 8 uni, 9 null, 10 cross,
///   11 convex spread (hull area / bbox area of member pixels),
///   12..13 mean/std member intensity, 14..15 mean/std contrast,
///   16..17 mean/std fuzziness, 18 mean member r-g chromaticity
struct ContourGroup {
  GroupKind kind = GroupKind::Clot;
  std::vector<std::size_t> members;  // indices into the input list, ascending
  PointF pole;
  std::array<double, kGroupAttributes> attributes{};
};

std::vector<ContourGroup> find_clots(const std::vector<ContourSegment>& segments);
/// Tight and loose bundles, in that order of kind.
std::vector<ContourGroup> find_bundles(const std::vector<ContourSegment>& segments);

enum class DogSource { Dog, EdgeBand };

struct DogRegion {
  DogSource source = DogSource::Dog;
  Region region;
  shape::DistributionDescriptor distribution;
  shape::SymAxisDescriptorSet axis;
};

BinaryMask contour_mask(const std::vector<RawContour>& contours, ContourKind kind, int scale, int width,
                        int height);

/// Regions where |dog| exceeds its 90th percentile, plus the band
/// dilate(edges1, 2) minus dilate(edges2, 2).
std::vector<DogRegion> dog_regions(const ScalePair& sp, const BinaryMask& edges1, const BinaryMask& edges2,
                                   std::size_t min_area = 0);

}  // namespace lesion::topo
