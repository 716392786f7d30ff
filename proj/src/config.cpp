#include "lesionkit/config.hpp"

#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

#include "lesionkit/codec.hpp"
#include "toml.hpp"

namespace lesion {
namespace {

template <class T>
void read_number(const toml::node& node, const std::string& key, T& out) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!node.is_boolean()) throw DataError("config key '" + key + "' must be a boolean");
    out = *node.value<bool>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!node.is_integer()) throw DataError("config key '" + key + "' must be an integer");
    const auto v = *node.value<std::int64_t>();
    if (v < 0 && std::is_unsigned_v<T>) throw DataError("config key '" + key + "' must not be negative");
    out = static_cast<T>(v);
  } else {
    if (!node.is_number()) throw DataError("config key '" + key + "' must be a number");
    out = *node.value<double>();
  }
}

using Setter = std::function<void(const toml::node&, const std::string&)>;

template <class T>
Setter bind(T& field) {
  return [&field](const toml::node& n, const std::string& key) { read_number(n, key, field); };
}

std::map<std::string, std::map<std::string, Setter>> table_of(PipelineConfig& c) {
  return {
      {"threshold",
       {{"bins", bind(c.threshold.bins)},
        {"smoothing", bind(c.threshold.smoothing)},
        {"min_prominence_frac", bind(c.threshold.min_prominence_frac)},
        {"max_peaks", bind(c.threshold.max_peaks)},
        {"closing", bind(c.threshold.closing)},
        {"min_confidence", bind(c.threshold.min_confidence)},
        {"min_area", bind(c.threshold.min_area)}}},
      {"border",
       {{"penalty", bind(c.threshold.border.penalty)},
        {"touch_frac", bind(c.threshold.border.touch_frac)},
        {"frame_penalty", bind(c.threshold.border.frame_penalty)},
        {"frame_touch_frac", bind(c.threshold.border.frame_touch_frac)},
        {"frame_cover_frac", bind(c.threshold.border.frame_cover_frac)}}},
      {"cluster",
       {{"k_min", bind(c.cluster.k_min)},
        {"k_max", bind(c.cluster.k_max)},
        {"max_iterations", bind(c.cluster.kmeans.max_iterations)},
        {"tolerance", bind(c.cluster.kmeans.tolerance)},
        {"sigma_rgb", bind(c.cluster.sigma_rgb)},
        {"containment", bind(c.cluster.containment)},
        {"min_area", bind(c.cluster.min_area)}}},
      {"ensemble",
       {{"vote_threshold", bind(c.ensemble.vote_threshold)},
        {"top_n", bind(c.ensemble.top_n)},
        {"min_relative", bind(c.ensemble.min_relative)}}},
      {"classify",
       {{"components", bind(c.classify.components)},
        {"folds", bind(c.classify.folds)},
        {"equal_priors", bind(c.classify.equal_priors)}}},
      {"run", {{"seed", bind(c.run.seed)}, {"max_dim", bind(c.run.max_dim)}, {"jobs", bind(c.run.jobs)}}},
  };
}

void require(bool ok, const char* what) {
  if (!ok) throw DataError(std::string("config value out of range: ") + what);
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

}  // namespace

void PipelineConfig::validate() const {
  require(threshold.bins >= 8 && threshold.bins <= 4096, "threshold.bins in [8, 4096]");
  require(threshold.smoothing >= 1 && threshold.smoothing <= 64, "threshold.smoothing in [1, 64]");
  require(threshold.min_prominence_frac >= 0.0 && threshold.min_prominence_frac < 1.0,
          "threshold.min_prominence_frac in [0, 1)");
  require(threshold.closing >= 0 && threshold.closing <= 8, "threshold.closing in [0, 8]");
  require(threshold.max_peaks >= 1 && threshold.max_peaks <= 64, "threshold.max_peaks in [1, 64]");
  require(threshold.min_confidence >= 0.0, "threshold.min_confidence >= 0");
  for (const double v : {threshold.border.penalty, threshold.border.touch_frac, threshold.border.frame_penalty,
                         threshold.border.frame_touch_frac, threshold.border.frame_cover_frac})
    require(v >= 0.0 && v <= 1.0, "border values in [0, 1]");
  require(cluster.k_min >= 2 && cluster.k_min <= cluster.k_max && cluster.k_max <= 8, "2 <= cluster.k_min <= k_max <= 8");
  require(cluster.kmeans.max_iterations >= 1, "cluster.max_iterations >= 1");
  require(cluster.kmeans.tolerance >= 0.0, "cluster.tolerance >= 0");
  require(cluster.sigma_rgb > 0.0, "cluster.sigma_rgb > 0");
  require(cluster.containment > 0.0 && cluster.containment <= 1.0, "cluster.containment in (0, 1]");
  require(ensemble.vote_threshold >= 1 && ensemble.vote_threshold <= kSourceCount, "ensemble.vote_threshold in [1, 7]");
  require(ensemble.top_n >= 1, "ensemble.top_n >= 1");
  require(ensemble.min_relative >= 0.0 && ensemble.min_relative <= 1.0, "ensemble.min_relative in [0, 1]");
  require(classify.components >= 0, "classify.components >= 0");
  require(classify.folds >= 2, "classify.folds >= 2");
  require(run.max_dim >= 0, "run.max_dim >= 0 (0 keeps full size)");
  require(run.jobs >= 0, "run.jobs >= 0");
}

PipelineConfig parse_config(const std::string& text) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "config parse error: " << e.description() << " (line " << e.source().begin.line << ")";
    throw DataError(msg.str());
  }
  PipelineConfig cfg;
  auto tables = table_of(cfg);
  for (const auto& [name, node] : root) {
    const std::string tname(name.str());
    const auto t = tables.find(tname);
    if (t == tables.end()) throw DataError("unknown config table '" + tname + "'");
    if (!node.is_table()) throw DataError("config entry '" + tname + "' must be a table");
    for (const auto& [key, value] : *node.as_table()) {
      const std::string kname(key.str());
      const auto s = t->second.find(kname);
      if (s == t->second.end()) throw DataError("unknown config key '" + tname + "." + kname + "'");
      s->second(value, tname + "." + kname);
    }
  }
  cfg.validate();
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  const auto bytes = read_file(path);
  return parse_config(std::string(bytes.begin(), bytes.end()));
}

std::string dump_config(const PipelineConfig& c) {
  std::ostringstream o;
  o << "[threshold]\n"
    << "bins = " << c.threshold.bins << "\n"
    << "smoothing = " << c.threshold.smoothing << "\n"
    << "min_prominence_frac = " << num(c.threshold.min_prominence_frac) << "\n"
    << "max_peaks = " << c.threshold.max_peaks << "\n"
    << "closing = " << c.threshold.closing << "\n"
    << "min_confidence = " << num(c.threshold.min_confidence) << "\n"
    << "min_area = " << c.threshold.min_area << "  # 0: 0.05% of the image area\n\n"
    << "[border]\n"
    << "penalty = " << num(c.threshold.border.penalty) << "\n"
    << "touch_frac = " << num(c.threshold.border.touch_frac) << "\n"
    << "frame_penalty = " << num(c.threshold.border.frame_penalty) << "\n"
    << "frame_touch_frac = " << num(c.threshold.border.frame_touch_frac) << "\n"
    << "frame_cover_frac = " << num(c.threshold.border.frame_cover_frac) << "\n\n"
    << "[cluster]\n"
    << "k_min = " << c.cluster.k_min << "\n"
    << "k_max = " << c.cluster.k_max << "\n"
    << "max_iterations = " << c.cluster.kmeans.max_iterations << "\n"
    << "tolerance = " << num(c.cluster.kmeans.tolerance) << "\n"
    << "sigma_rgb = " << num(c.cluster.sigma_rgb) << "\n"
    << "containment = " << num(c.cluster.containment) << "\n"
    << "min_area = " << c.cluster.min_area << "\n\n"
    << "[ensemble]\n"
    << "vote_threshold = " << c.ensemble.vote_threshold << "\n"
    << "top_n = " << c.ensemble.top_n << "\n"
    << "min_relative = " << num(c.ensemble.min_relative) << "\n\n"
    << "[classify]\n"
    << "components = " << c.classify.components << "  # 0: min(64, #train - #classes)\n"
    << "folds = " << c.classify.folds << "\n"
    << "equal_priors = " << (c.classify.equal_priors ? "true" : "false") << "\n\n"
    << "[run]\n"
    << "seed = " << c.run.seed << "\n"
    << "max_dim = " << c.run.max_dim << "\n"
    << "jobs = " << c.run.jobs << "\n";
  return o.str();
}

}  // namespace lesion
