#include "lesionkit/ensemble.hpp"

#include <algorithm>

#include "lesionkit/region.hpp"

namespace lesion::ensemble {

TypeMap select_type_map(const std::vector<CandidateRegion>& candidates, SourceType source, int top_n,
                        int width, int height, double min_relative) {
  if (top_n < 1) throw DataError("top_n must be at least 1");
  std::vector<const CandidateRegion*> own;
  for (const CandidateRegion& c : candidates)
    if (c.source == source) own.push_back(&c);
  // Stable: equal scores keep their discovery order.
  std::stable_sort(own.begin(), own.end(),
                   [](const CandidateRegion* a, const CandidateRegion* b) { return a->confidence > b->confidence; });
  TypeMap tm{source, BinaryMask(width, height), 0.0, 0};
  if (own.empty()) return tm;
  tm.confidence = own.front()->confidence;
  const double floor = min_relative * own.front()->confidence;
  for (const CandidateRegion* c : own) {
    if (tm.selected >= top_n || c->confidence < floor) break;
    for (const Point p : c->region->pixels) tm.mask(p.x, p.y) = 1;
    ++tm.selected;
  }
  return tm;
}

ConfidenceMap fuse(const std::vector<TypeMap>& maps) {
  if (maps.empty()) throw EmptyInputError("fuse needs at least one type map");
  const int w = maps.front().mask.width(), h = maps.front().mask.height();
  ConfidenceMap cm{PlaneMap(w, h)};
  for (const TypeMap& m : maps) {
    if (m.mask.width() != w || m.mask.height() != h)
      throw DimensionMismatchError("type maps differ in size");
    for (std::size_t i = 0; i < m.mask.size(); ++i) cm.votes[i] += m.mask[i] ? 1.0 : 0.0;
  }
  return cm;
}

BinaryMask vote_mask(const ConfidenceMap& cm, int vote_threshold) {
  BinaryMask m(cm.votes.width(), cm.votes.height());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = cm.votes[i] >= vote_threshold ? 1 : 0;
  return m;
}

BinaryMask finalize(const ConfidenceMap& cm, int vote_threshold) {
  if (vote_threshold < 1 || vote_threshold > kSourceCount) throw DataError("vote_threshold must be in [1, 7]");
  BinaryMask m = vote_mask(cm, vote_threshold);
  if (count_set(m) == 0) m = vote_mask(cm, 1);
  if (count_set(m) == 0) return m;
  const std::vector<Region> regions = connected_regions(m, 1);
  if (regions.size() >= 2) return convex_hull_mask(regions, m.width(), m.height());
  return m;
}

double evaluate_mask(const BinaryMask& pred, const BinaryMask& truth) {
  if (pred.width() != truth.width() || pred.height() != truth.height())
    throw DimensionMismatchError("prediction and truth differ in size");
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i]) {
      pred[i] ? ++tp : ++fn;
    } else {
      pred[i] ? ++fp : ++tn;
    }
  }
  if (tp + fn == 0) throw UndefinedMetricError("truth mask is empty");
  if (tn + fp == 0) throw UndefinedMetricError("truth mask covers the whole image");
  const double sensitivity = static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double specificity = static_cast<double>(tn) / static_cast<double>(tn + fp);
  return sensitivity * specificity;
}

ImageScore score_image(const std::string& id, const std::vector<TypeMap>& maps, const BinaryMask& final_mask,
                       const BinaryMask& truth) {
  if (maps.size() != static_cast<std::size_t>(kSourceCount)) throw DataError("expected 7 type maps");
  ImageScore s;
  s.id = id;
  for (const TypeMap& m : maps) s.per_type[static_cast<std::size_t>(m.source)] = evaluate_mask(m.mask, truth);
  s.ensemble = evaluate_mask(final_mask, truth);
  s.dominating = 0;
  for (int t = 1; t < kSourceCount; ++t)
    if (s.per_type[static_cast<std::size_t>(t)] > s.per_type[static_cast<std::size_t>(s.dominating)]) s.dominating = t;
  s.max_per_image = std::max(s.per_type[static_cast<std::size_t>(s.dominating)], s.ensemble);
  return s;
}

SegmentationReport aggregate(std::vector<ImageScore> scores) {
  SegmentationReport r;
  for (const ImageScore& s : scores) {
    if (s.error) continue;
    ++r.images;
    for (std::size_t t = 0; t < static_cast<std::size_t>(kSourceCount); ++t) r.per_type[t] += s.per_type[t];
    r.ensemble += s.ensemble;
    r.max_per_image += s.max_per_image;
    ++r.dominating_counts[static_cast<std::size_t>(s.dominating)];
  }
  if (r.images) {
    const double n = static_cast<double>(r.images);
    for (double& v : r.per_type) v /= n;
    r.ensemble /= n;
    r.max_per_image /= n;
  }
  r.per_image = std::move(scores);
  return r;
}

}  // namespace lesion::ensemble
