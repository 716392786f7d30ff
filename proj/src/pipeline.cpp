#include "lesionkit/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "lesionkit/codec.hpp"
#include "lesionkit/random.hpp"
#include "lesionkit/threshold.hpp"

namespace lesion::pipeline {

Segmentation segment(const RasterImage& img, const PipelineConfig& cfg, const cluster::PrototypeStore* store,
                     const cluster::ClusterAnalysis& analysis) {
  Segmentation s;
  s.candidates = threshold::threshold_candidates(img, cfg.threshold);
  auto more = cluster::cluster_candidates(analysis, store, cfg.cluster);
  s.candidates.insert(s.candidates.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  for (int t = 0; t < kSourceCount; ++t)
    s.maps.push_back(ensemble::select_type_map(s.candidates, source_at(t), cfg.ensemble.top_n, img.width(),
                                               img.height(), cfg.ensemble.min_relative));
  s.confidence = ensemble::fuse(s.maps);
  s.final_mask = ensemble::finalize(s.confidence, cfg.ensemble.vote_threshold);
  return s;
}

Segmentation segment(const RasterImage& img, const PipelineConfig& cfg, const cluster::PrototypeStore* store,
                     std::uint64_t seed, cluster::ClusterAnalysis* analysis_out) {
  cluster::ClusterConfig cc = cfg.cluster;
  cc.border = cfg.threshold.border;
  cluster::ClusterAnalysis ca = cluster::analyze_clusters(img, cc, seed);
  Segmentation s = segment(img, cfg, store, ca);
  if (analysis_out) *analysis_out = std::move(ca);
  return s;
}

std::uint64_t image_seed(std::uint64_t root, const std::string& id) { return derive_seed(root, id); }

LoadedImage load_entry(const DatasetEntry& e, int max_dim) {
  LoadedImage li;
  li.image = limit_size(load_image(e.image), max_dim);
  if (e.truth) {
    const BinaryMask truth = load_mask(*e.truth);
    li.truth = resize_nearest(truth, li.image.width(), li.image.height());
  }
  return li;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = jobs > 0 ? static_cast<std::size_t>(jobs) : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

ensemble::SegmentationReport evaluate_segmentation(const DatasetManifest& m, const PipelineConfig& cfg,
                                                   const cluster::PrototypeStore* store) {
  std::vector<const DatasetEntry*> with_truth;
  for (const auto& e : m.entries)
    if (e.truth) with_truth.push_back(&e);
  std::vector<ensemble::ImageScore> scores(with_truth.size());
  parallel_for(with_truth.size(), cfg.run.jobs, [&](std::size_t i) {
    const DatasetEntry& e = *with_truth[i];
    try {
      const LoadedImage li = load_entry(e, cfg.run.max_dim);
      const Segmentation s = segment(li.image, cfg, store, image_seed(cfg.run.seed, e.id));
      scores[i] = ensemble::score_image(e.id, s.maps, s.final_mask, *li.truth);
    } catch (const Error& err) {
      scores[i].id = e.id;
      scores[i].error = err.what();
    }
  });
  return ensemble::aggregate(std::move(scores));
}

std::vector<std::string> card_names() {
  std::vector<std::string> names;
  for (int t = 0; t < kSourceCount; ++t) names.emplace_back(source_name(source_at(t)));
  names.emplace_back("ensemble");
  return names;
}

int card_index(const std::string& name) {
  if (name == "ensemble") return ensemble::kEnsembleIndex;
  return static_cast<int>(source_from_name(name));
}

void apply_selections(ensemble::SegmentationReport& r, const std::map<std::string, std::string>& selections) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& s : r.per_image) {
    if (s.error) continue;
    const auto it = selections.find(s.id);
    if (it == selections.end()) continue;
    const int idx = card_index(it->second);
    sum += idx == ensemble::kEnsembleIndex ? s.ensemble : s.per_type[static_cast<std::size_t>(idx)];
    ++n;
  }
  r.human_selected_count = n;
  r.human_selected = n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
}

cluster::PrototypeStore learn_prototypes(const DatasetManifest& m, const PipelineConfig& cfg) {
  // Per-image learning merges to the same set as one pooled call and keeps
  // only one decoded image per worker in memory.
  cluster::ClusterConfig cc = cfg.cluster;
  cc.border = cfg.threshold.border;
  std::vector<std::vector<cluster::Color>> found(m.entries.size());
  parallel_for(m.entries.size(), cfg.run.jobs, [&](std::size_t i) {
    const DatasetEntry& e = m.entries[i];
    if (!e.truth) return;
    try {
      const LoadedImage li = load_entry(e, cfg.run.max_dim);
      found[i] = cluster::learn_prototypes({{&li.image, &*li.truth}}, cc).prototypes;
    } catch (const Error&) {
      // unreadable images and images without a qualifying region add nothing
    }
  });
  cluster::PrototypeStore store;
  store.sigma_rgb = cc.sigma_rgb;
  for (const auto& f : found) store.prototypes.insert(store.prototypes.end(), f.begin(), f.end());
  std::sort(store.prototypes.begin(), store.prototypes.end());
  store.prototypes.erase(std::unique(store.prototypes.begin(), store.prototypes.end()), store.prototypes.end());
  if (store.empty()) throw DataError("no cluster region lies inside any truth mask");
  return store;
}

}  // namespace lesion::pipeline
