#include "galaxy/pca.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

#include "galaxy/error.hpp"

namespace galaxy {

namespace {

constexpr int kPcaFormatVersion = 1;
// Eigenvalues below this fraction of the largest are treated as zero.
constexpr double kRankTolerance = 1e-10;

}  // namespace

PcaModel fit_pca(std::span<const std::vector<double>> objects) {
  const std::size_t m = objects.size();
  if (m < 2) throw Error(ErrorKind::invalid_argument, "PCA needs at least 2 objects");
  const std::size_t d = objects.front().size();
  if (d == 0) throw Error(ErrorKind::invalid_argument, "PCA objects must be non-empty");
  for (std::size_t i = 0; i < m; ++i) {
    if (objects[i].size() != d) {
      throw Error(ErrorKind::invalid_argument, "object " + std::to_string(i) + " has length " +
                                                   std::to_string(objects[i].size()) + ", expected " +
                                                   std::to_string(d));
    }
  }

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (const auto& o : objects) {
    for (std::size_t k = 0; k < d; ++k) model.mean[k] += o[k];
  }
  for (double& v : model.mean) v /= static_cast<double>(m);

  // Columns of A are the difference vectors.
  Eigen::MatrixXd a(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = objects[i][k] - model.mean[k];
    }
  }
  const Eigen::MatrixXd gram = a.transpose() * a;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorKind::degenerate_input, "Gram matrix eigen-decomposition failed");
  }

  // Eigen returns ascending eigenvalues.
  const Eigen::VectorXd& values = solver.eigenvalues();
  const double largest = values(values.size() - 1);
  if (!(largest > 0.0)) throw Error(ErrorKind::degenerate_input, "rank-0 data: all objects are identical");

  double total = 0.0;
  for (Eigen::Index i = values.size() - 1; i >= 0; --i) {
    const double lambda = values(i);
    if (lambda <= kRankTolerance * largest) break;
    if (model.components.size() == m - 1) break;
    Eigen::VectorXd v = a * solver.eigenvectors().col(i);
    v.normalize();
    Eigen::Index peak = 0;
    v.cwiseAbs().maxCoeff(&peak);
    if (v(peak) < 0) v = -v;
    model.components.emplace_back(v.data(), v.data() + v.size());
    model.eigenvalues.push_back(lambda);
    total += lambda;
  }

  double running = 0.0;
  for (double lambda : model.eigenvalues) {
    running += lambda;
    model.cumvar.push_back(running / total);
  }
  model.cumvar.back() = 1.0;
  return model;
}

FeatureVector project(const PcaModel& model, std::span<const double> object, std::size_t n) {
  if (object.size() != model.dimension()) {
    throw Error(ErrorKind::invalid_argument, "object length " + std::to_string(object.size()) +
                                                 " does not match model dimension " +
                                                 std::to_string(model.dimension()));
  }
  if (n > model.component_count()) {
    throw Error(ErrorKind::invalid_argument, "requested " + std::to_string(n) + " components, model has " +
                                                 std::to_string(model.component_count()));
  }
  FeatureVector coeffs(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = model.components[i];
    double dot = 0.0;
    for (std::size_t k = 0; k < object.size(); ++k) dot += (object[k] - model.mean[k]) * v[k];
    coeffs[i] = dot;
  }
  return coeffs;
}

std::vector<double> reconstruct(const PcaModel& model, std::span<const double> coefficients) {
  if (coefficients.size() > model.component_count()) {
    throw Error(ErrorKind::invalid_argument, "more coefficients than components");
  }
  std::vector<double> out = model.mean;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    const auto& v = model.components[i];
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += coefficients[i] * v[k];
  }
  return out;
}

std::size_t select_components(const PcaModel& model, double variance_target) {
  if (!(variance_target > 0.0 && variance_target <= 1.0)) {
    throw Error(ErrorKind::invalid_argument, "variance target must lie in (0, 1]");
  }
  const auto it = std::lower_bound(model.cumvar.begin(), model.cumvar.end(), variance_target);
  if (it == model.cumvar.end()) return model.cumvar.size();
  return static_cast<std::size_t>(it - model.cumvar.begin()) + 1;
}

std::string pca_to_json(const PcaModel& model) {
  nlohmann::json j;
  j["format_version"] = kPcaFormatVersion;
  j["kind"] = "pca";
  j["dimension"] = model.dimension();
  j["mean"] = model.mean;
  j["eigenvalues"] = model.eigenvalues;
  j["cumvar"] = model.cumvar;
  j["components"] = model.components;
  return j.dump();
}

PcaModel pca_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::format, std::string("PCA model is not valid JSON: ") + e.what());
  }
  if (j.value("kind", "") != "pca" || j.value("format_version", 0) != kPcaFormatVersion) {
    throw Error(ErrorKind::format, "not a version-" + std::to_string(kPcaFormatVersion) + " PCA model");
  }
  PcaModel model;
  try {
    model.mean = j.at("mean").get<std::vector<double>>();
    model.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    model.cumvar = j.at("cumvar").get<std::vector<double>>();
    model.components = j.at("components").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::format, std::string("malformed PCA model: ") + e.what());
  }
  const std::size_t n = model.components.size();
  if (model.eigenvalues.size() != n || model.cumvar.size() != n) {
    throw Error(ErrorKind::format, "PCA model arrays disagree in length");
  }
  for (const auto& v : model.components) {
    if (v.size() != model.mean.size()) throw Error(ErrorKind::format, "PCA component has wrong dimension");
  }
  return model;
}

void write_cumvar_csv(std::ostream& out, const PcaModel& model) {
  const auto precision = out.precision(12);
  out << "component,eigenvalue,cumvar\n";
  for (std::size_t i = 0; i < model.component_count(); ++i) {
    out << (i + 1) << ',' << model.eigenvalues[i] << ',' << model.cumvar[i] << '\n';
  }
  out.precision(precision);
}

}  // namespace galaxy
