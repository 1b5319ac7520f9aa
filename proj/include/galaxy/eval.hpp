#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "galaxy/learn.hpp"
#include "galaxy/types.hpp"

namespace galaxy {

struct FoldPlan {
  std::uint64_t seed = 0;
  std::size_t folds = 0;
  bool stratified = true;
  std::vector<std::size_t> fold_of;  // fold id per item

  std::vector<std::size_t> test_indices(std::size_t fold) const;
  std::vector<std::size_t> train_indices(std::size_t fold) const;
};

/// Seeded k-fold assignment. Stratified plans shuffle each class separately
/// and deal its items round-robin, continuing from where the previous class
/// stopped, so fold sizes differ by at most one overall and per class.
FoldPlan make_folds(std::span<const GalaxyClass> labels, std::size_t k, std::uint64_t seed, bool stratified = true);

/// Rows = true class, columns = predicted class.
struct ConfusionMatrix {
  std::array<std::array<std::size_t, kClassCount>, kClassCount> counts{};

  std::size_t total() const;
  std::size_t correct() const;
  double accuracy() const;                     // trace / total, in [0, 1]
  double class_accuracy(GalaxyClass c) const;  // diagonal / row sum; 0 for empty rows
  std::size_t row_sum(GalaxyClass c) const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

ConfusionMatrix confusion(std::span<const GalaxyClass> predicted, std::span<const GalaxyClass> truth);

struct EvalReport {
  std::string algorithm;
  std::string features;  // feature configuration label, e.g. "13 (12 PCs + FDV)"
  std::size_t feature_count = 0;
  bool with_fdv = false;
  std::vector<double> run_accuracies;  // percent, one per run
  double mean_accuracy = 0.0;          // percent
  ConfusionMatrix pooled;              // over every run's predictions
  std::array<double, kClassCount> class_accuracies{};  // percent
};

/// Trains a model on the given training rows; `seed` is unique per (run, fold).
using Learner = std::function<TrainedModel(const LabeledDataset& train, std::uint64_t seed)>;

struct CvOptions {
  std::size_t folds = 10;
  std::size_t runs = 5;
  std::uint64_t base_seed = 42;
  bool stratified = true;
};

/// Runs `runs` repetitions of k-fold cross-validation with run seeds
/// base_seed + r. A per-run accuracy is the pooled fraction of correctly
/// predicted held-out items for that run.
EvalReport cross_validate(const LabeledDataset& data, const Learner& learner, const CvOptions& options,
                          std::string algorithm_name = "custom");
EvalReport cross_validate(const LabeledDataset& data, const AlgorithmConfig& config, const CvOptions& options);

/// Accuracy grid: one row per algorithm, one column per feature configuration,
/// plus a trailing "mean" row of column means.
struct AccuracyTable {
  std::vector<std::string> algorithms;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> cells;  // [algorithm][column], percent
  std::vector<double> column_means;
};

/// Arranges reports into a grid (first-seen order of algorithms and columns).
/// Missing cells are NaN and are skipped by the mean.
AccuracyTable report_tables(std::span<const EvalReport> reports);

std::vector<double> column_means(const std::vector<std::vector<double>>& cells, std::size_t columns);

std::string format_table_text(const AccuracyTable& table);
std::string format_table_csv(const AccuracyTable& table);
AccuracyTable parse_table_csv(const std::string& csv);

std::string format_confusion_csv(const ConfusionMatrix& m);
std::string format_confusion_text(const ConfusionMatrix& m, const std::string& title);

}  // namespace galaxy
