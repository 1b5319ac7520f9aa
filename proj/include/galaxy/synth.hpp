#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "galaxy/raster.hpp"
#include "galaxy/types.hpp"

namespace galaxy {

/// Shape controls for the synthetic galaxy generator. Lengths are in pixels,
/// angles in radians (measured from the column axis toward increasing row).
struct SynthParams {
  GalaxyClass kind = GalaxyClass::elliptical;
  std::size_t width = 256;
  std::size_t height = 256;
  std::uint64_t seed = 0;
  double rotation = 0.0;
  double noise = 0.02;       // std-dev of additive noise, fraction of full scale; [0, 0.2]
  double sky_floor = 0.03;   // isophote (fraction of peak) below which the sky is black
  double brightness = 1.0;   // peak intensity as a fraction of 255, (0, 1]

  // elliptical (axis_ratio is also the projected disk ratio of spirals)
  double axis_ratio = 0.6;   // (0, 1]
  double scale = 30.0;       // exponential scale length

  // spiral
  int arms = 2;
  double winding = 0.4;      // radians of arm phase per unit log-radius
  double disk_scale = 30.0;
  double arm_contrast = 0.8; // [0, 1]

  // irregular
  int blobs = 6;
  double spread = 45.0;

  /// Throws invalid_argument when a field leaves its documented range.
  void validate() const;
};

/// Renders one galaxy. Deterministic in (params, params.seed).
GrayImage generate_galaxy(const SynthParams& params);

struct SynthDataset {
  std::vector<GrayImage> images;
  std::vector<GalaxyClass> labels;
  std::vector<SynthParams> params;
};

/// Draws per-item shape parameters from documented ranges; item i (counted
/// across classes in elliptical, spiral, irregular order) uses seed base_seed + i.
SynthParams random_params(GalaxyClass kind, std::uint64_t seed, std::size_t size = 256);

SynthDataset generate_dataset(const std::array<std::size_t, kClassCount>& counts, std::uint64_t base_seed,
                              std::size_t size = 256);

/// Default dataset composition: 17 elliptical, 104 spiral, 10 irregular.
inline constexpr std::array<std::size_t, kClassCount> kReferenceCounts = {17, 104, 10};

}  // namespace galaxy
