#pragma once

#include <cstdint>
#include <string>

#include "lesionkit/cluster.hpp"
#include "lesionkit/threshold.hpp"

namespace lesion {

struct EnsembleConfig {
  int vote_threshold = 3;
  int top_n = 2;
  /// Candidates below this share of their source's best score are not merged.
  double min_relative = 0.25;
};

struct ClassifyConfig {
  int components = 0;  // 0 selects min(64, #train - #classes)
  int folds = 5;
  bool equal_priors = false;
};

struct RunConfig {
  std::uint64_t seed = 0;
  int max_dim = 512;
  int jobs = 0;  // 0 uses the hardware concurrency
};

struct PipelineConfig {
  threshold::ThresholdConfig threshold;
  cluster::ClusterConfig cluster;
  EnsembleConfig ensemble;
  ClassifyConfig classify;
  RunConfig run;

  /// Throws DataError naming the first out-of-range value.
  void validate() const;
};

/// Parses TOML. Unknown tables or keys and values of the wrong type are
/// rejected with DataError; missing keys keep their defaults.
PipelineConfig parse_config(const std::string& toml_text);
PipelineConfig load_config(const std::string& path);
/// TOML text that parse_config reads back to the same configuration.
std::string dump_config(const PipelineConfig& cfg);

}  // namespace lesion
