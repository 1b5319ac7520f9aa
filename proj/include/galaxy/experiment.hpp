#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "galaxy/eval.hpp"
#include "galaxy/learn.hpp"
#include "galaxy/pca.hpp"
#include "galaxy/raster.hpp"

namespace galaxy {

/// Whether images enter feature extraction standardized or merely resized.
enum class ImageRegime { original, standardized };

/// Feature regimes: which PCA coefficients are used and
/// whether the fractal-dimension value is appended.
enum class FeatureKind { pcs, pcs_fdv, fdv, one_pc, one_pc_fdv };

FeatureKind parse_feature_kind(const std::string& name);
std::string to_string(FeatureKind kind);

/// Images brought to 128x128 plus their PCA model and FDV features.
struct PreparedImages {
  std::vector<GrayImage> images;
  std::vector<std::vector<double>> pixel_vectors;  // row-major, scaled to [0, 1]
  std::vector<double> fdv;
  PcaModel pca;
};

/// Row-major pixels scaled by 1/255.
std::vector<double> pixel_vector(const GrayImage& img);

/// `names[i]` identifies image i in error messages.
PreparedImages prepare_images(const std::vector<GrayImage>& images, ImageRegime regime,
                              const std::vector<std::string>& names = {});

/// Feature matrix for one configuration; `pcs` is the PC count for the
/// pcs / pcs_fdv kinds and ignored otherwise.
LabeledDataset build_features(const PreparedImages& prepared, const std::vector<GalaxyClass>& labels,
                              FeatureKind kind, std::size_t pcs);

/// Column heading used in accuracy tables, e.g. "12 PCs + FDV".
std::string feature_label(FeatureKind kind, std::size_t pcs);

struct ExperimentConfig {
  std::vector<FeatureKind> features = {FeatureKind::pcs, FeatureKind::pcs_fdv};
  std::vector<Algorithm> algorithms = {Algorithm::c45, Algorithm::knn, Algorithm::forest, Algorithm::svm};
  std::optional<std::size_t> components;  // explicit PC count; otherwise from variance_target
  double variance_target = 0.8;
  CvOptions cv;
  AlgorithmConfig base;  // per-algorithm parameters
};

struct ExperimentResult {
  std::size_t pcs = 0;
  std::vector<EvalReport> reports;
  AccuracyTable table;
};

ExperimentResult run_experiment(const PreparedImages& prepared, const std::vector<GalaxyClass>& labels,
                                const ExperimentConfig& config);

}  // namespace galaxy
