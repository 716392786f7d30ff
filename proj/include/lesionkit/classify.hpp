#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lesionkit/descriptors.hpp"

namespace lesion::classify {

inline constexpr int kBins = 12;
using Edges = std::array<double, kBins + 1>;

/// Counts per bin (values below edges[1] land in bin 0, values at or above
/// edges[11] in bin 11), normalized to sum 1. Empty input gives zeros.
std::array<double, kBins> attribute_histogram(std::span<const double> values, const Edges& edges);

/// Which schema types take part in a feature vector; empty means all.
using TypeFilter = std::vector<std::size_t>;

/// Per-attribute bin edges: 12 equal bins between the 1st and 99th
/// percentile of the pooled training values.
std::vector<Edges> learn_edges(const std::vector<const desc::DescriptorBundle*>& training);

std::size_t feature_length(const TypeFilter& filter = {});
/// Concatenated attribute histograms in schema order. `edges` covers all
/// 280 attributes regardless of the filter.
Eigen::VectorXd featurize(const desc::DescriptorBundle& bundle, const std::vector<Edges>& edges,
                          const TypeFilter& filter = {});

struct FitOptions {
  int components = 0;        // 0 selects min(64, n - classes)
  bool equal_priors = false;  // otherwise class frequencies
};

/// PCA followed by LDA on the projections.
struct FeatureModel {
  int classes = 0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd basis;        // D x P, orthonormal columns
  Eigen::VectorXd eigenvalues;  // P, variance along each column
  Eigen::MatrixXd class_means;  // C x P
  Eigen::MatrixXd weights;      // P x C
  Eigen::VectorXd bias;         // C
  std::vector<bool> present;    // class seen in training

  int components() const { return static_cast<int>(basis.cols()); }
};

/// Rows of `x` are samples; labels in [0, classes). Throws
/// InsufficientClassDataError when a present class has a single sample or
/// fewer than two classes are present.
FeatureModel fit_features(const Eigen::MatrixXd& x, const std::vector<int>& labels, int classes,
                          const FitOptions& opts = {});

struct Prediction {
  int label = 0;
  std::vector<double> scores;
};

Prediction predict_features(const FeatureModel& m, const Eigen::VectorXd& v);

struct TrainedModel {
  std::string schema_version;
  std::vector<std::string> labels;
  TypeFilter filter;
  std::vector<Edges> edges;
  FeatureModel model;

  std::string to_json() const;
  static TrainedModel from_json(const std::string& text);
};

TrainedModel fit(const std::vector<const desc::DescriptorBundle*>& bundles, const std::vector<int>& labels,
                 const std::vector<std::string>& class_names, const FitOptions& opts = {},
                 const TypeFilter& filter = {});
/// Throws SchemaError when `v` does not match the model's feature length.
Prediction predict(const TrainedModel& m, const Eigen::VectorXd& v);
Prediction predict(const TrainedModel& m, const desc::DescriptorBundle& bundle);

using Confusion = std::vector<std::vector<long long>>;  // [truth][predicted]

struct CvOptions {
  int folds = 5;
  std::uint64_t seed = 0;
  FitOptions fit;
  TypeFilter filter;
  /// Explicit fold of every sample; overrides stratified assignment.
  std::optional<std::vector<int>> fold_of;
};

struct CvResult {
  double accuracy = 0.0;
  Confusion confusion;
  std::vector<int> predictions;
  std::vector<int> fold_of;
  std::vector<TrainedModel> fold_models;
};

/// Stratified assignment; each class needs at least `folds` samples.
std::vector<int> stratified_folds(const std::vector<int>& labels, int classes, int folds, std::uint64_t seed);

CvResult cross_validate(const std::vector<const desc::DescriptorBundle*>& bundles, const std::vector<int>& labels,
                        const std::vector<std::string>& class_names, const CvOptions& opts = {});

/// Cross-validation on ready-made feature vectors (rows of `x`).
struct FeatureCvResult {
  double accuracy = 0.0;
  Confusion confusion;
  std::vector<int> predictions;
};
FeatureCvResult cross_validate_features(const Eigen::MatrixXd& x, const std::vector<int>& labels, int classes,
                                        const CvOptions& opts = {});

struct TypeAccuracy {
  std::string type;
  double accuracy = 0.0;
};
/// Cross-validation restricted to one descriptor type at a time.
std::vector<TypeAccuracy> per_type_accuracy(const std::vector<const desc::DescriptorBundle*>& bundles,
                                            const std::vector<int>& labels,
                                            const std::vector<std::string>& class_names, const CvOptions& opts = {});

/// Squared reconstruction error of the training rows with the first `p` components.
double reconstruction_error(const FeatureModel& m, const Eigen::MatrixXd& x, int p);

}  // namespace lesion::classify
