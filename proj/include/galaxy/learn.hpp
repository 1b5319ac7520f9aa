#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "galaxy/pca.hpp"
#include "galaxy/types.hpp"

namespace galaxy {

struct LabeledDataset {
  std::vector<FeatureVector> features;  // rows x arity
  std::vector<GalaxyClass> labels;
  std::vector<std::string> feature_names;

  std::size_t rows() const noexcept { return labels.size(); }
  std::size_t arity() const noexcept { return feature_names.size(); }

  /// Throws invalid_argument on ragged rows, label/row count mismatch, or a
  /// feature column with no finite value.
  void validate() const;

  LabeledDataset subset(std::span<const std::size_t> indices) const;
  std::array<std::size_t, kClassCount> class_counts() const;
};

enum class Algorithm { c45, knn, forest, svm, majority };

std::string_view to_string(Algorithm a);
/// Accepts "c45", "knn", "rf", "svm", "majority".
Algorithm parse_algorithm(std::string_view name);

struct TreeParams {
  std::size_t min_leaf = 2;
  double confidence = 0.25;  // pessimistic-error pruning confidence
  bool prune = true;
};

struct KnnParams {
  std::size_t k = 3;
};

struct ForestParams {
  std::size_t trees = 100;
  std::size_t features_per_split = 0;  // 0 selects ceil(sqrt(arity))
  std::size_t min_leaf = 1;
  std::uint64_t seed = 1;
  bool bootstrap = true;  // false trains every tree on the full set (test hook)
};

struct SvmParams {
  double c = 1.0;
  double tolerance = 1e-3;
  std::size_t max_iterations = 100000;
};

struct AlgorithmConfig {
  Algorithm algorithm = Algorithm::c45;
  TreeParams tree;
  KnnParams knn;
  ForestParams forest;
  SvmParams svm;
};

/// Per-feature z-scoring captured from training rows. Empty = identity.
struct Scaler {
  std::vector<double> mean;
  std::vector<double> scale;

  static Scaler fit(const std::vector<FeatureVector>& rows);
  FeatureVector apply(std::span<const double> x) const;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // value <= threshold
  int right = -1;  // value > threshold
  GalaxyClass label = GalaxyClass::elliptical;
  std::array<double, kClassCount> counts{};
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root

  GalaxyClass predict(std::span<const double> x) const;
  std::size_t depth() const;
  std::size_t leaf_count() const;
};

struct KnnModel {
  std::size_t k = 3;
  std::vector<FeatureVector> points;  // already scaled
  std::vector<GalaxyClass> labels;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
};

/// One pairwise machine: decision(x) = sum coef_i K(sv_i, x) - rho; > 0 votes `positive`.
struct BinarySvm {
  GalaxyClass positive = GalaxyClass::elliptical;
  GalaxyClass negative = GalaxyClass::spiral;
  std::vector<FeatureVector> support;
  std::vector<double> coef;  // alpha_i * y_i
  double rho = 0.0;

  double decision(std::span<const double> x) const;
};

struct SvmModel {
  std::vector<BinarySvm> machines;
  std::vector<GalaxyClass> present;  // classes seen in training
};

struct MajorityModel {
  GalaxyClass label = GalaxyClass::spiral;
};

class TrainedModel {
 public:
  using Body = std::variant<DecisionTree, KnnModel, ForestModel, SvmModel, MajorityModel>;

  TrainedModel(Algorithm algorithm, std::size_t arity, Scaler scaler, Body body);

  Algorithm algorithm() const noexcept { return algorithm_; }
  std::size_t arity() const noexcept { return arity_; }
  const Scaler& scaler() const noexcept { return scaler_; }
  const Body& body() const noexcept { return body_; }

  /// Throws invalid_argument on arity mismatch or non-finite input.
  GalaxyClass predict(std::span<const double> features) const;

  std::string to_json() const;
  static TrainedModel from_json(const std::string& text);

 private:
  Algorithm algorithm_;
  std::size_t arity_;
  Scaler scaler_;
  Body body_;
};

TrainedModel train_c45(const LabeledDataset& data, const TreeParams& params = {});
TrainedModel train_knn(const LabeledDataset& data, const KnnParams& params = {});
TrainedModel train_forest(const LabeledDataset& data, const ForestParams& params = {});
TrainedModel train_svm(const LabeledDataset& data, const SvmParams& params = {});
TrainedModel train_majority(const LabeledDataset& data);

/// Dispatches on config.algorithm. `seed` replaces config.forest.seed.
TrainedModel train(const LabeledDataset& data, const AlgorithmConfig& config, std::uint64_t seed);

/// Distance-weighted vote among the k nearest rows (weights 1/d^2). An exact
/// match short-circuits to the majority label among zero-distance rows.
GalaxyClass knn_vote(std::span<const FeatureVector> points, std::span<const GalaxyClass> labels,
                     std::span<const double> query, std::size_t k);

/// Degree-2 polynomial kernel (x . y + 1)^2.
double poly2_kernel(std::span<const double> x, std::span<const double> y);

/// Dual solution of one soft-margin binary problem (labels +1 / -1).
struct SvmSolution {
  std::vector<double> alpha;
  double rho = 0.0;
  std::size_t iterations = 0;
  double objective = 0.0;  // 0.5 a^T Q a - sum a
};

SvmSolution solve_svm_dual(std::span<const FeatureVector> x, std::span<const int> y, const SvmParams& params);

/// Upper bound on the error count at confidence `cf` (C4.5's pessimistic estimate),
/// returned as the extra errors to add to `errors`.
double pessimistic_extra_errors(double n, double errors, double cf);

}  // namespace galaxy
