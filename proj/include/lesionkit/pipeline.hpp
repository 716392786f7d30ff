#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lesionkit/cluster.hpp"
#include "lesionkit/config.hpp"
#include "lesionkit/dataset.hpp"
#include "lesionkit/ensemble.hpp"

namespace lesion::pipeline {

struct Segmentation {
  std::vector<CandidateRegion> candidates;
  std::vector<ensemble::TypeMap> maps;  // one per source, in source order
  ensemble::ConfidenceMap confidence;
  BinaryMask final_mask;
};

/// Thresholding and cluster candidates, per-type selection, voting and the
/// final mask. Cra and Hull maps stay empty without prototypes.
Segmentation segment(const RasterImage& img, const PipelineConfig& cfg, const cluster::PrototypeStore* store,
                     std::uint64_t seed, cluster::ClusterAnalysis* analysis_out = nullptr);
Segmentation segment(const RasterImage& img, const PipelineConfig& cfg, const cluster::PrototypeStore* store,
                     const cluster::ClusterAnalysis& analysis);

/// Seed of one image, independent of the rest of the batch.
std::uint64_t image_seed(std::uint64_t root, const std::string& id);

struct LoadedImage {
  RasterImage image;
  std::optional<BinaryMask> truth;  // resized to the working image
};

/// Decodes the image (downsampled to max_dim) and its truth mask if any.
LoadedImage load_entry(const DatasetEntry& e, int max_dim);

/// Runs fn(i) for i in [0, n) on `jobs` threads (0 = hardware threads).
/// Exceptions escaping fn are rethrown after all work finished.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

/// Segments every entry with a truth mask. Per-image failures become error
/// records and do not stop the run.
ensemble::SegmentationReport evaluate_segmentation(const DatasetManifest& m, const PipelineConfig& cfg,
                                                   const cluster::PrototypeStore* store);

/// Card names: the seven source names plus "ensemble".
std::vector<std::string> card_names();
/// Index into ImageScore::per_type, or kEnsembleIndex; throws DataError.
int card_index(const std::string& name);

/// Fills human_selected from per-image selections (image id -> card name).
void apply_selections(ensemble::SegmentationReport& r, const std::map<std::string, std::string>& selections);

cluster::PrototypeStore learn_prototypes(const DatasetManifest& m, const PipelineConfig& cfg);

}  // namespace lesion::pipeline
