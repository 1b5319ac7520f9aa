#include "galaxy/experiment.hpp"

#include "galaxy/error.hpp"
#include "galaxy/fractal.hpp"
#include "galaxy/standardize.hpp"

namespace galaxy {

FeatureKind parse_feature_kind(const std::string& name) {
  if (name == "pcs") return FeatureKind::pcs;
  if (name == "pcs+fdv") return FeatureKind::pcs_fdv;
  if (name == "fdv") return FeatureKind::fdv;
  if (name == "1pc") return FeatureKind::one_pc;
  if (name == "1pc+fdv") return FeatureKind::one_pc_fdv;
  throw Error(ErrorKind::invalid_argument, "unknown feature configuration '" + name + "'");
}

std::string to_string(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::pcs: return "pcs";
    case FeatureKind::pcs_fdv: return "pcs+fdv";
    case FeatureKind::fdv: return "fdv";
    case FeatureKind::one_pc: return "1pc";
    case FeatureKind::one_pc_fdv: return "1pc+fdv";
  }
  return "unknown";
}

std::string feature_label(FeatureKind kind, std::size_t pcs) {
  switch (kind) {
    case FeatureKind::pcs: return std::to_string(pcs) + " PCs";
    case FeatureKind::pcs_fdv: return std::to_string(pcs) + " PCs + FDV";
    case FeatureKind::fdv: return "FDV";
    case FeatureKind::one_pc: return "1 PC";
    case FeatureKind::one_pc_fdv: return "1 PC + FDV";
  }
  return "unknown";
}

std::vector<double> pixel_vector(const GrayImage& img) {
  std::vector<double> v;
  v.reserve(img.size());
  for (std::uint8_t p : img.pixels()) v.push_back(static_cast<double>(p) / 255.0);
  return v;
}

PreparedImages prepare_images(const std::vector<GrayImage>& images, ImageRegime regime,
                              const std::vector<std::string>& names) {
  PreparedImages out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string name = i < names.size() ? names[i] : "image " + std::to_string(i);
    try {
      GrayImage img = regime == ImageRegime::standardized ? standardize(images[i])
                                                          : resize_bilinear(images[i], kStandardSize, kStandardSize);
      out.fdv.push_back(fd_feature(img));
      out.pixel_vectors.push_back(pixel_vector(img));
      out.images.push_back(std::move(img));
    } catch (const Error& e) {
      throw Error(e.kind(), name + ": " + e.what());
    }
  }
  out.pca = fit_pca(out.pixel_vectors);
  return out;
}

LabeledDataset build_features(const PreparedImages& prepared, const std::vector<GalaxyClass>& labels,
                              FeatureKind kind, std::size_t pcs) {
  if (labels.size() != prepared.images.size()) {
    throw Error(ErrorKind::invalid_argument, "label count does not match image count");
  }
  std::size_t n_pcs = 0;
  bool with_fdv = false;
  switch (kind) {
    case FeatureKind::pcs: n_pcs = pcs; break;
    case FeatureKind::pcs_fdv: n_pcs = pcs; with_fdv = true; break;
    case FeatureKind::fdv: with_fdv = true; break;
    case FeatureKind::one_pc: n_pcs = 1; break;
    case FeatureKind::one_pc_fdv: n_pcs = 1; with_fdv = true; break;
  }
  LabeledDataset data;
  for (std::size_t i = 0; i < n_pcs; ++i) data.feature_names.push_back("pc" + std::to_string(i + 1));
  if (with_fdv) data.feature_names.push_back("fdv");
  data.labels = labels;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    FeatureVector row = project(prepared.pca, prepared.pixel_vectors[i], n_pcs);
    if (with_fdv) row.push_back(prepared.fdv[i]);
    data.features.push_back(std::move(row));
  }
  data.validate();
  return data;
}

ExperimentResult run_experiment(const PreparedImages& prepared, const std::vector<GalaxyClass>& labels,
                                const ExperimentConfig& config) {
  ExperimentResult result;
  result.pcs = config.components ? *config.components : select_components(prepared.pca, config.variance_target);
  if (result.pcs == 0 || result.pcs > prepared.pca.component_count()) {
    throw Error(ErrorKind::invalid_argument, "PC count " + std::to_string(result.pcs) + " outside [1, " +
                                                 std::to_string(prepared.pca.component_count()) + "]");
  }
  for (FeatureKind kind : config.features) {
    const LabeledDataset data = build_features(prepared, labels, kind, result.pcs);
    for (Algorithm algorithm : config.algorithms) {
      AlgorithmConfig ac = config.base;
      ac.algorithm = algorithm;
      EvalReport report = cross_validate(data, ac, config.cv);
      report.features = feature_label(kind, result.pcs);
      result.reports.push_back(std::move(report));
    }
  }
  result.table = report_tables(result.reports);
  return result;
}

}  // namespace galaxy
