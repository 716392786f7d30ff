#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lesionkit/image.hpp"
#include "lesionkit/region.hpp"
#include "lesionkit/threshold.hpp"

namespace lesion::cluster {

using Color = std::array<double, 3>;

struct ClusterLabeling {
  int k = 0;
  Grid<int> labels;            // per pixel, in [0, k)
  std::vector<Color> centers;  // k entries
  std::vector<bool> empty;     // cluster received no sample
  /// WCSS over the sampled pixels after each Lloyd iteration; entry 0 is the
  /// seeding assignment.
  std::vector<double> wcss_history;
  int iterations = 0;
};

struct KmeansOptions {
  int max_iterations = 100;
  double tolerance = 0.5;  // max center movement, RGB units
  std::size_t full_limit = 512 * 512;
  std::size_t sample_target = 256 * 1024;
};

/// Lloyd's algorithm in RGB space with k-means++ seeding driven by `seed`.
/// Images with fewer than k distinct colors yield flagged empty clusters.
ClusterLabeling kmeans_rgb(const RasterImage& img, int k, std::uint64_t seed,
                           const KmeansOptions& opts = {});

/// Connected components per cluster label; regions are label-pure.
std::vector<Region> labeling_regions(const ClusterLabeling& cl, std::size_t min_area);

struct PrototypeStore {
  std::vector<Color> prototypes;  // sorted, unique
  double sigma_rgb = 30.0;

  std::string to_json() const;
  static PrototypeStore from_json(const std::string& text);
  bool empty() const noexcept { return prototypes.empty(); }
};

struct TrainingSample {
  const RasterImage* image = nullptr;
  const BinaryMask* truth = nullptr;
};

struct ClusterConfig {
  int k_min = 2;
  int k_max = 8;
  KmeansOptions kmeans;
  double sigma_rgb = 30.0;
  /// Share of a nested region's pixels that must fall inside the host.
  double containment = 0.95;
  std::size_t min_area = 0;  // 0 selects 0.05% of the image area
  threshold::BorderRule border;
};

/// Collects the mean color of every cluster region lying completely inside
/// its image's truth mask. Clustering is seeded from the image content, so
/// the result does not depend on the order of `training`.
PrototypeStore learn_prototypes(const std::vector<TrainingSample>& training, const ClusterConfig& cfg);

Color mean_color(const Region& rg, const RasterImage& img);
double rgb_melanomaty(const Color& mean, const PrototypeStore& store);
double rgb_melanomaty(const Region& rg, const RasterImage& img, const PrototypeStore& store);

struct InteriorityStats {
  double solidity = 0.0;
  double central_compactness = 0.0;
  double hole_fraction = 0.0;
  double ringness = 0.0;
};

InteriorityStats interiority(const Region& rg);

/// L_CRA = c * a * s_RGB.
double score_cra(const Region& rg, double s_rgb, const threshold::BorderRule& border = {});
/// L_Ity = c * a * solidity * central compactness * (1 - ringness).
double score_ity(const Region& rg, const InteriorityStats& st, const threshold::BorderRule& border = {});
/// L_Hull = c * a * sum(s_RGB * nested area / host area) over contained regions.
double score_hull(const Region& rg, const std::vector<std::pair<const Region*, double>>& nested,
                  double containment = 0.95, const threshold::BorderRule& border = {});

/// All clusterings of one image with their pooled regions.
struct ClusterAnalysis {
  std::vector<ClusterLabeling> labelings;
  std::vector<std::shared_ptr<const Region>> regions;
  std::vector<int> region_labeling;  // index into labelings
  std::vector<Color> region_color;
  /// Component id maps, one per labeling; region r of labeling L has id
  /// region_component[r] in component_maps[L].
  std::vector<Grid<int>> component_maps;
  std::vector<int> region_component;
};

ClusterAnalysis analyze_clusters(const RasterImage& img, const ClusterConfig& cfg, std::uint64_t seed);

/// Scores every pooled region with L_Ity, and with L_CRA and L_Hull when a
/// prototype store is given.
std::vector<CandidateRegion> cluster_candidates(const ClusterAnalysis& ca, const PrototypeStore* store,
                                                const ClusterConfig& cfg);

}  // namespace lesion::cluster
