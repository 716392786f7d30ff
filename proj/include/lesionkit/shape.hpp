#pragma once

#include <array>
#include <span>
#include <vector>

#include "lesionkit/image.hpp"
#include "lesionkit/region.hpp"

namespace lesion::shape {

inline constexpr int kSignatureSamples = 128;
inline constexpr int kFourierTerms = 5;

struct RadialSignature {
  std::vector<double> samples;  // centroid-to-boundary distance, uniform in arc length
  double mean_radius = 0.0;
};

/// Centroid distance along the outer boundary, resampled to 128 points and
/// started at the boundary pixel closest to angle 0 seen from the centroid.
/// Throws DegenerateRegionError for fewer than 8 boundary pixels or when the
/// centroid lies on the boundary.
RadialSignature radial_signature(const Region& rg);
RadialSignature radial_signature(const std::vector<Point>& boundary, PointF centroid);

struct BoundaryDescriptor {
  double extrema_count = 0.0;
  double extrema_mean_prominence = 0.0;  // relative to the mean radius
  double extrema_spacing_std = 0.0;      // fraction of the contour
  std::array<double, kFourierTerms> fourier{};  // |X_k| / |X_0|, k = 1..5

  std::array<double, 8> values() const;
};

BoundaryDescriptor boundary_descriptor(const RadialSignature& sig);

/// |X_k| / |X_0| for k = 1..5, computed from the sorted-sum circular
/// autocorrelation, so a circular shift of `signal` reproduces the result
/// bit for bit.
std::array<double, kFourierTerms> fourier_magnitudes(std::span<const double> signal);

struct DistributionDescriptor {
  double solidity = 0.0;
  double compactness = 0.0;
  double silhouetteness = 0.0;
  double centrality = 0.0;
  double peripherality = 0.0;
  double coverage = 0.0;
  double hollowness = 0.0;
  double ringness = 0.0;

  std::array<double, 8> values() const;
};

/// Artifact-defined formulas:
///   silhouetteness = outer perimeter / (outer + hole perimeters)
///   hollowness     = hole area / (area + hole area)
///   ringness       = 1 - (pixels within half the equivalent radius of the
///                    centroid) / (count expected for a disk), clipped
DistributionDescriptor distribution_descriptor(const Region& rg, int width, int height);

/// Color statistics of a region and of a 3-pixel ring around it (14 values):
/// mean/std of R, G, B and gray, mean/std of chromaticities r and g,
/// gray contrast to the ring, RGB distance to the ring.
std::array<double, 14> appearance_descriptor(const Region& rg, const RasterImage& img);

using AxisSegmentRow = std::array<double, 6>;  // length, mean radius, radius slope, straightness,
                                               // mean intensity, intensity contrast
using ForkRow = std::array<double, 4>;         // arm count, arm angle spread, radius at branch, mean intensity
using PeakRow = std::array<double, 3>;         // peak radius, local isotropy, mean intensity

struct SymAxisDescriptorSet {
  std::vector<AxisSegmentRow> short_rows;
  std::vector<AxisSegmentRow> long_rows;
  std::vector<ForkRow> forks;
  std::vector<PeakRow> peaks;
};

struct SymAxisOptions {
  std::size_t min_area = 25;
  /// Spurs are end branches shorter than max(spur_min, spur_radius_ratio * radius at their junction).
  double spur_min = 3.0;
  double spur_radius_ratio = 1.5;
  /// Segments shorter than short_factor * their mean radius are "short".
  double short_factor = 2.0;
};

/// Symmetric axis with its radii, in region-local coordinates.
struct SymAxis {
  Point origin;        // image position of local (0, 0)
  BinaryMask skeleton;
  PlaneMap distance;
};

SymAxis symmetric_axis(const Region& rg, const SymAxisOptions& opts = {});

/// Short/long segment, fork and peak rows of the region's symmetric axis.
/// Intensity attributes read `gray` when given and are 0 otherwise.
SymAxisDescriptorSet sym_axis_descriptors(const Region& rg, const PlaneMap* gray = nullptr,
                                          const SymAxisOptions& opts = {});

}  // namespace lesion::shape
