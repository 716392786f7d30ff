#include "lesionkit/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "json.hpp"
#include "lesionkit/random.hpp"

namespace lesion::cluster {
namespace {

double dist2(const Color& a, const Color& b) {
  const double dr = a[0] - b[0], dg = a[1] - b[1], db = a[2] - b[2];
  return dr * dr + dg * dg + db * db;
}

Color pixel_color(std::span<const std::uint8_t> bytes, std::size_t i) {
  return {static_cast<double>(bytes[3 * i]), static_cast<double>(bytes[3 * i + 1]),
          static_cast<double>(bytes[3 * i + 2])};
}

int nearest(const Color& c, const std::vector<Color>& centers, double* d2_out = nullptr) {
  int best = 0;
  double bd = dist2(c, centers[0]);
  for (std::size_t j = 1; j < centers.size(); ++j) {
    const double d = dist2(c, centers[j]);
    if (d < bd) {
      bd = d;
      best = static_cast<int>(j);
    }
  }
  if (d2_out) *d2_out = bd;
  return best;
}

}  // namespace

ClusterLabeling kmeans_rgb(const RasterImage& img, int k, std::uint64_t seed, const KmeansOptions& opts) {
  if (k < 2 || k > 8) throw DataError("k must be in [2, 8]");
  const auto bytes = img.bytes();
  const std::size_t n = img.pixel_count();
  std::size_t stride = 1;
  if (n > opts.full_limit)
    stride = std::max<std::size_t>(1, (n + opts.sample_target - 1) / opts.sample_target);
  std::vector<Color> samples;
  samples.reserve(n / stride + 1);
  for (std::size_t i = 0; i < n; i += stride) samples.push_back(pixel_color(bytes, i));

  // k-means++ seeding.
  Rng rng(seed);
  ClusterLabeling cl;
  cl.k = k;
  cl.centers.push_back(samples[rng.index(samples.size())]);
  std::vector<double> d2(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) d2[i] = dist2(samples[i], cl.centers[0]);
  while (static_cast<int>(cl.centers.size()) < k) {
    double total = 0.0;
    for (const double d : d2) total += d;
    std::size_t pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      pick = samples.size() - 1;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        u -= d2[i];
        if (u < 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      while (d2[pick] == 0.0 && pick > 0) --pick;  // never duplicate a center by rounding
    } else {
      rng.next();  // keep the stream length independent of the image
    }
    cl.centers.push_back(samples[pick]);
    for (std::size_t i = 0; i < samples.size(); ++i)
      d2[i] = std::min(d2[i], dist2(samples[i], cl.centers.back()));
  }

  std::vector<int> assign(samples.size());
  auto assign_all = [&] {
    double wcss = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      double d = 0.0;
      assign[i] = nearest(samples[i], cl.centers, &d);
      wcss += d;
    }
    return wcss;
  };
  cl.wcss_history.push_back(assign_all());

  for (int it = 0; it < opts.max_iterations; ++it) {
    std::vector<Color> sum(static_cast<std::size_t>(k), Color{0, 0, 0});
    std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
      auto& s = sum[static_cast<std::size_t>(assign[i])];
      for (int c = 0; c < 3; ++c) s[static_cast<std::size_t>(c)] += samples[i][static_cast<std::size_t>(c)];
      ++count[static_cast<std::size_t>(assign[i])];
    }
    double moved = 0.0;
    for (std::size_t j = 0; j < static_cast<std::size_t>(k); ++j) {
      if (count[j] == 0) continue;  // empty clusters keep their center
      Color c{sum[j][0] / count[j], sum[j][1] / count[j], sum[j][2] / count[j]};
      moved = std::max(moved, std::sqrt(dist2(c, cl.centers[j])));
      cl.centers[j] = c;
    }
    const std::vector<int> before = assign;
    cl.wcss_history.push_back(assign_all());
    cl.iterations = it + 1;
    if (moved < opts.tolerance || assign == before) break;
  }

  std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
  cl.labels = Grid<int>(img.width(), img.height());
  for (std::size_t i = 0; i < n; ++i) {
    const int lab = nearest(pixel_color(bytes, i), cl.centers);
    cl.labels[i] = lab;
    ++count[static_cast<std::size_t>(lab)];
  }
  cl.empty.resize(static_cast<std::size_t>(k));
  for (std::size_t j = 0; j < count.size(); ++j) cl.empty[j] = count[j] == 0;
  return cl;
}

std::vector<Region> labeling_regions(const ClusterLabeling& cl, std::size_t min_area) {
  const ComponentLabels comps = label_components(cl.labels);
  std::vector<std::vector<Point>> members(static_cast<std::size_t>(comps.count));
  for (int y = 0; y < cl.labels.height(); ++y)
    for (int x = 0; x < cl.labels.width(); ++x) members[static_cast<std::size_t>(comps.ids(x, y))].push_back({x, y});
  std::vector<Region> out;
  for (auto& px : members)
    if (px.size() >= std::max<std::size_t>(1, min_area))
      out.push_back(make_region(std::move(px), cl.labels.width(), cl.labels.height()));
  return out;
}

std::string PrototypeStore::to_json() const {
  nlohmann::json j;
  j["sigma_rgb"] = sigma_rgb;
  j["prototypes"] = nlohmann::json::array();
  for (const Color& c : prototypes) j["prototypes"].push_back({c[0], c[1], c[2]});
  return j.dump(2) + "\n";
}

PrototypeStore PrototypeStore::from_json(const std::string& text) {
  PrototypeStore s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.sigma_rgb = j.at("sigma_rgb").get<double>();
    for (const auto& p : j.at("prototypes")) {
      if (p.size() != 3) throw DataError("prototype must have 3 components");
      s.prototypes.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("prototype store: ") + e.what());
  }
  if (!(s.sigma_rgb > 0.0)) throw DataError("prototype store: sigma_rgb must be positive");
  for (const Color& c : s.prototypes)
    for (const double v : c)
      if (!(v >= 0.0 && v <= 255.0)) throw DataError("prototype store: component outside [0,255]");
  std::sort(s.prototypes.begin(), s.prototypes.end());
  s.prototypes.erase(std::unique(s.prototypes.begin(), s.prototypes.end()), s.prototypes.end());
  return s;
}

Color mean_color(const Region& rg, const RasterImage& img) {
  Color acc{0, 0, 0};
  for (const Point p : rg.pixels) {
    const Rgb c = img.at(p.x, p.y);
    for (int i = 0; i < 3; ++i) acc[static_cast<std::size_t>(i)] += c[static_cast<std::size_t>(i)];
  }
  for (double& v : acc) v /= static_cast<double>(rg.area);
  return acc;
}

PrototypeStore learn_prototypes(const std::vector<TrainingSample>& training, const ClusterConfig& cfg) {
  if (training.empty()) throw EmptyInputError("learn_prototypes needs at least one training image");
  PrototypeStore store;
  store.sigma_rgb = cfg.sigma_rgb;
  for (const TrainingSample& t : training) {
    if (!t.image || !t.truth) throw DataError("training sample without image or truth");
    if (!t.image->width() || t.truth->width() != t.image->width() || t.truth->height() != t.image->height())
      throw DimensionMismatchError("truth mask does not match its image");
    if (count_set(*t.truth) == 0) throw EmptyInputError("training truth mask is empty");
    const std::uint64_t content = fnv1a(t.image->bytes());
    const std::size_t min_area =
        cfg.min_area ? cfg.min_area : default_min_area(t.image->width(), t.image->height());
    for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
      const ClusterLabeling cl = kmeans_rgb(*t.image, k, derive_seed(content, static_cast<std::uint64_t>(k)), cfg.kmeans);
      for (const Region& rg : labeling_regions(cl, min_area)) {
        const bool inside = std::all_of(rg.pixels.begin(), rg.pixels.end(),
                                        [&](Point p) { return (*t.truth)(p.x, p.y) != 0; });
        if (inside) store.prototypes.push_back(mean_color(rg, *t.image));
      }
    }
  }
  if (store.prototypes.empty()) throw EmptyInputError("no cluster region fell inside any truth mask");
  std::sort(store.prototypes.begin(), store.prototypes.end());
  store.prototypes.erase(std::unique(store.prototypes.begin(), store.prototypes.end()), store.prototypes.end());
  return store;
}

double rgb_melanomaty(const Color& mean, const PrototypeStore& store) {
  if (store.empty()) throw EmptyInputError("prototype store is empty");
  double best = std::numeric_limits<double>::infinity();
  for (const Color& p : store.prototypes) best = std::min(best, dist2(mean, p));
  return std::exp(-best / (2.0 * store.sigma_rgb * store.sigma_rgb));
}

double rgb_melanomaty(const Region& rg, const RasterImage& img, const PrototypeStore& store) {
  return rgb_melanomaty(mean_color(rg, img), store);
}

InteriorityStats interiority(const Region& rg) {
  InteriorityStats st;
  st.solidity = rg.solidity;
  st.hole_fraction = static_cast<double>(rg.hole_area) / static_cast<double>(rg.area + rg.hole_area);

  const double a = static_cast<double>(rg.area);
  const double r_half = 0.5 * std::sqrt(a / std::numbers::pi);
  std::size_t inner = 0;
  for (const Point p : rg.pixels)
    if (std::hypot(p.x - rg.centroid.x, p.y - rg.centroid.y) <= r_half) ++inner;
  st.central_compactness = std::min(1.0, static_cast<double>(inner) / (a / 4.0));

  // Ringness: how little of the hull's own core the region covers.
  const HullSpans spans = rasterize_hull(rg.hull);
  double hx = 0.0, hy = 0.0;
  std::size_t hn = 0;
  for (std::size_t r = 0; r < spans.rows.size(); ++r)
    for (int x = spans.rows[r].first; x <= spans.rows[r].second; ++x) {
      hx += x;
      hy += spans.y0 + static_cast<double>(r);
      ++hn;
    }
  hx /= static_cast<double>(hn);
  hy /= static_cast<double>(hn);
  const double core_r = 0.5 * std::sqrt(static_cast<double>(hn) / std::numbers::pi);
  const BBox& bb = rg.bbox;
  std::vector<std::uint8_t> local(bb.area(), 0);
  for (const Point p : rg.pixels)
    local[static_cast<std::size_t>(p.y - bb.y0) * bb.width() + (p.x - bb.x0)] = 1;
  std::size_t core = 0, covered = 0;
  for (std::size_t r = 0; r < spans.rows.size(); ++r) {
    const int y = spans.y0 + static_cast<int>(r);
    for (int x = spans.rows[r].first; x <= spans.rows[r].second; ++x) {
      if (std::hypot(x - hx, y - hy) > core_r) continue;
      ++core;
      covered += local[static_cast<std::size_t>(y - bb.y0) * bb.width() + (x - bb.x0)];
    }
  }
  st.ringness = core ? 1.0 - static_cast<double>(covered) / static_cast<double>(core) : 0.0;
  return st;
}

double score_cra(const Region& rg, double s_rgb, const threshold::BorderRule& border) {
  return threshold::basic_confidence(rg, border) * s_rgb;
}

double score_ity(const Region& rg, const InteriorityStats& st, const threshold::BorderRule& border) {
  return threshold::basic_confidence(rg, border) * st.solidity * st.central_compactness * (1.0 - st.ringness);
}

double score_hull(const Region& rg, const std::vector<std::pair<const Region*, double>>& nested,
                  double containment, const threshold::BorderRule& border) {
  const BBox& bb = rg.bbox;
  std::vector<std::uint8_t> local(bb.area(), 0);
  for (const Point p : rg.pixels)
    local[static_cast<std::size_t>(p.y - bb.y0) * bb.width() + (p.x - bb.x0)] = 1;
  double sum = 0.0;
  for (const auto& [q, s] : nested) {
    if (q == &rg || q->area >= rg.area) continue;
    std::size_t inside = 0;
    for (const Point p : q->pixels)
      if (p.x >= bb.x0 && p.x <= bb.x1 && p.y >= bb.y0 && p.y <= bb.y1)
        inside += local[static_cast<std::size_t>(p.y - bb.y0) * bb.width() + (p.x - bb.x0)];
    if (static_cast<double>(inside) >= containment * static_cast<double>(q->area))
      sum += s * static_cast<double>(q->area) / static_cast<double>(rg.area);
  }
  return threshold::basic_confidence(rg, border) * sum;
}

ClusterAnalysis analyze_clusters(const RasterImage& img, const ClusterConfig& cfg, std::uint64_t seed) {
  ClusterAnalysis ca;
  const std::size_t min_area = cfg.min_area ? cfg.min_area : default_min_area(img.width(), img.height());
  for (int k = cfg.k_min; k <= cfg.k_max; ++k) {
    ClusterLabeling cl = kmeans_rgb(img, k, derive_seed(seed, static_cast<std::uint64_t>(k)), cfg.kmeans);
    const int li = static_cast<int>(ca.labelings.size());
    ComponentLabels comps = label_components(cl.labels);
    std::vector<std::vector<Point>> members(static_cast<std::size_t>(comps.count));
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) members[static_cast<std::size_t>(comps.ids(x, y))].push_back({x, y});
    for (std::size_t id = 0; id < members.size(); ++id) {
      if (members[id].size() < min_area) continue;
      auto rg = std::make_shared<const Region>(make_region(std::move(members[id]), img.width(), img.height()));
      ca.region_color.push_back(mean_color(*rg, img));
      ca.regions.push_back(std::move(rg));
      ca.region_labeling.push_back(li);
      ca.region_component.push_back(static_cast<int>(id));
    }
    ca.component_maps.push_back(std::move(comps.ids));
    ca.labelings.push_back(std::move(cl));
  }
  return ca;
}

std::vector<CandidateRegion> cluster_candidates(const ClusterAnalysis& ca, const PrototypeStore* store,
                                                const ClusterConfig& cfg) {
  const std::size_t n = ca.regions.size();
  std::vector<double> s_rgb(n, 0.0);
  const bool have_store = store && !store->empty();
  if (have_store)
    for (std::size_t i = 0; i < n; ++i) s_rgb[i] = rgb_melanomaty(ca.region_color[i], *store);

  // Nesting: a region from another clustering is contained in a host when at
  // least `containment` of its pixels carry the host's component id.
  std::vector<double> nested_sum(n, 0.0);
  if (have_store) {
    std::vector<std::vector<int>> by_component(ca.labelings.size());
    for (std::size_t L = 0; L < ca.labelings.size(); ++L) {
      int max_id = -1;
      for (const int v : ca.component_maps[L].values()) max_id = std::max(max_id, v);
      by_component[L].assign(static_cast<std::size_t>(max_id + 1), -1);
    }
    for (std::size_t i = 0; i < n; ++i)
      by_component[static_cast<std::size_t>(ca.region_labeling[i])][static_cast<std::size_t>(ca.region_component[i])] =
          static_cast<int>(i);
    for (std::size_t q = 0; q < n; ++q) {
      const Region& rq = *ca.regions[q];
      for (std::size_t L = 0; L < ca.labelings.size(); ++L) {
        if (static_cast<int>(L) == ca.region_labeling[q]) continue;
        const Grid<int>& ids = ca.component_maps[L];
        // Majority vote, then verify.
        int cand = -1;
        std::size_t votes = 0;
        for (const Point p : rq.pixels) {
          const int id = ids(p.x, p.y);
          if (votes == 0) {
            cand = id;
            votes = 1;
          } else if (id == cand) {
            ++votes;
          } else {
            --votes;
          }
        }
        std::size_t hits = 0;
        for (const Point p : rq.pixels) hits += ids(p.x, p.y) == cand ? 1 : 0;
        if (static_cast<double>(hits) < cfg.containment * static_cast<double>(rq.area)) continue;
        const int host = by_component[L][static_cast<std::size_t>(cand)];
        if (host < 0) continue;
        const Region& rh = *ca.regions[static_cast<std::size_t>(host)];
        if (rq.area >= rh.area) continue;
        nested_sum[static_cast<std::size_t>(host)] +=
            s_rgb[q] * static_cast<double>(rq.area) / static_cast<double>(rh.area);
      }
    }
  }

  std::vector<CandidateRegion> out;
  for (std::size_t i = 0; i < n; ++i) {
    const Region& rg = *ca.regions[i];
    const double base = threshold::basic_confidence(rg, cfg.border);
    const InteriorityStats st = interiority(rg);
    const double k = ca.labelings[static_cast<std::size_t>(ca.region_labeling[i])].k;
    auto emit = [&](SourceType t, double score) {
      if (!(score > 0.0)) return;
      CandidateRegion c;
      c.region = ca.regions[i];
      c.source = t;
      c.confidence = score;
      c.aux["k"] = k;
      if (have_store) c.aux["s_rgb"] = s_rgb[i];
      out.push_back(std::move(c));
    };
    emit(SourceType::KmeansIty, base * st.solidity * st.central_compactness * (1.0 - st.ringness));
    if (have_store) {
      emit(SourceType::KmeansCra, base * s_rgb[i]);
      emit(SourceType::KmeansHull, base * nested_sum[i]);
    }
  }
  return out;
}

}  // namespace lesion::cluster
