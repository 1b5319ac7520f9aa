#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace galaxy {

using FeatureVector = std::vector<double>;

/// Principal components of a set of objects, ranked by eigenvalue of the
/// unnormalized scatter matrix C = sum (o - mean)(o - mean)^T.
struct PcaModel {
  std::vector<double> mean;
  std::vector<std::vector<double>> components;  // orthonormal, each of length dimension()
  std::vector<double> eigenvalues;              // descending, paired with components
  std::vector<double> cumvar;                   // cumulative explained-variance fraction

  std::size_t dimension() const noexcept { return mean.size(); }
  std::size_t component_count() const noexcept { return components.size(); }
};

/// Fits through the M x M Gram matrix A^T A, so cost scales with the number
/// of objects rather than their dimension. Keeps at most M - 1 components
/// (those with non-negligible eigenvalue) and makes each component's
/// largest-magnitude entry positive. Throws degenerate_input for rank-0 data.
PcaModel fit_pca(std::span<const std::vector<double>> objects);

/// Coefficients (object - mean) . v_i for the first n components.
FeatureVector project(const PcaModel& model, std::span<const double> object, std::size_t n);

/// mean + sum coeff_i v_i.
std::vector<double> reconstruct(const PcaModel& model, std::span<const double> coefficients);

/// Smallest n with cumvar[n - 1] >= target, target in (0, 1].
std::size_t select_components(const PcaModel& model, double variance_target);

std::string pca_to_json(const PcaModel& model);
PcaModel pca_from_json(const std::string& text);

/// "component,eigenvalue,cumvar" rows.
void write_cumvar_csv(std::ostream& out, const PcaModel& model);

}  // namespace galaxy
