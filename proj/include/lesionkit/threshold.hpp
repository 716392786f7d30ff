#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "lesionkit/image.hpp"
#include "lesionkit/region.hpp"

namespace lesion {

/// The seven candidate sources, in reporting order.
enum class SourceType { Gray = 0, Red, Green, Blue, KmeansIty, KmeansCra, KmeansHull };
inline constexpr int kSourceCount = 7;

std::string_view source_name(SourceType t);
SourceType source_from_name(std::string_view name);  // throws DataError
inline SourceType source_at(int i) { return static_cast<SourceType>(i); }

struct CandidateRegion {
  std::shared_ptr<const Region> region;
  SourceType source = SourceType::Gray;
  double confidence = 0.0;
  std::map<std::string, double> aux;
};

namespace threshold {

struct Histogram {
  std::vector<double> edges;  // bins + 1, strictly increasing
  std::vector<long long> counts;
  std::size_t bins() const noexcept { return counts.size(); }
  double bin_width() const noexcept { return edges[1] - edges[0]; }
  double bin_center(std::size_t i) const noexcept { return 0.5 * (edges[i] + edges[i + 1]); }
};

struct Peak {
  double center = 0.0;      // intensity
  double width = 0.0;       // intensity span
  double prominence = 0.0;  // smoothed count units
};

/// Down-weighting of regions that run along the image frame. Applied to the
/// basic confidence shared by every measure.
struct BorderRule {
  double penalty = 0.5;
  double touch_frac = 0.2;
  /// Stronger multiplier for frame-dominated regions, typically the skin
  /// around the lesion.
  double frame_penalty = 0.01;
  double frame_touch_frac = 0.5;
  /// A region holding this share of the frame pixels also counts as
  /// frame-dominated.
  double frame_cover_frac = 0.25;
};

struct ThresholdConfig {
  int bins = 64;
  int smoothing = 3;
  double min_prominence_frac = 0.05;
  int max_peaks = 8;
  double min_confidence = 1e-4;
  BorderRule border;
  /// Closing radius applied to band maps before labelling, so thin hairs do
  /// not cut regions apart. 0 disables.
  int closing = 2;
  /// 0 selects 0.05% of the image area.
  std::size_t min_area = 0;
};

Histogram build_histogram(const PlaneMap& plane, int bins);

/// Peaks of the moving-average smoothed counts, sorted by prominence
/// (descending). Width is the full span at half prominence, clipped to the
/// valleys next to the peak.
std::vector<Peak> find_peaks(const Histogram& h, int smoothing, double min_prominence_frac);

BinaryMask band_threshold(const PlaneMap& plane, const Peak& p);

/// Border handling factor shared by all confidence measures.
double border_factor(const Region& rg, const BorderRule& rule);
/// L = c * a (normalized area), times the border factor.
double basic_confidence(const Region& rg, const BorderRule& rule);

std::vector<CandidateRegion> plane_candidates(const PlaneMap& plane, SourceType source,
                                              const ThresholdConfig& cfg);
std::vector<CandidateRegion> threshold_candidates(const RasterImage& img, const ThresholdConfig& cfg);

}  // namespace threshold
}  // namespace lesion
