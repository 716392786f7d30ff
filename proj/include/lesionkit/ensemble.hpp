#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lesionkit/image.hpp"
#include "lesionkit/threshold.hpp"

namespace lesion::ensemble {

struct TypeMap {
  SourceType source = SourceType::Gray;
  BinaryMask mask;
  double confidence = 0.0;  // best selected candidate's score, 0 if none
  int selected = 0;         // number of candidates in the union
};

/// Votes per pixel, integers in [0, 7].
struct ConfidenceMap {
  PlaneMap votes;
};

/// Union of the `top_n` most confident candidates of one source. Candidates
/// scoring below `min_relative` times the best of that source are skipped.
TypeMap select_type_map(const std::vector<CandidateRegion>& candidates, SourceType source, int top_n,
                        int width, int height, double min_relative = 0.0);

ConfidenceMap fuse(const std::vector<TypeMap>& maps);

/// Thresholds at >= vote_threshold; several surviving regions are replaced by
/// the convex hull of their union. An empty result falls back to >= 1.
BinaryMask finalize(const ConfidenceMap& cm, int vote_threshold);

/// Pixels with at least `vote_threshold` votes, before any hull merging.
BinaryMask vote_mask(const ConfidenceMap& cm, int vote_threshold);

/// Sensitivity times specificity.
double evaluate_mask(const BinaryMask& pred, const BinaryMask& truth);

inline constexpr int kEnsembleIndex = kSourceCount;  // 8th card after the 7 types

struct ImageScore {
  std::string id;
  std::array<double, kSourceCount> per_type{};
  double ensemble = 0.0;
  /// Best of the seven types and the ensemble.
  double max_per_image = 0.0;
  int dominating = 0;  // argmax over the seven types, ties to the lower index
  std::optional<std::string> error;
};

ImageScore score_image(const std::string& id, const std::vector<TypeMap>& maps, const BinaryMask& final_mask,
                       const BinaryMask& truth);

struct SegmentationReport {
  std::array<double, kSourceCount> per_type{};
  double ensemble = 0.0;
  double max_per_image = 0.0;
  std::array<int, kSourceCount> dominating_counts{};
  std::size_t images = 0;  // successfully scored
  std::vector<ImageScore> per_image;  // including error records
  /// Mean accuracy of human-selected candidates, when any selection applies.
  std::optional<double> human_selected;
  std::size_t human_selected_count = 0;
};

SegmentationReport aggregate(std::vector<ImageScore> scores);

}  // namespace lesion::ensemble
