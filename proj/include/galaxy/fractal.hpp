#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "galaxy/raster.hpp"
#include "galaxy/standardize.hpp"

namespace galaxy {

enum class BoxMode {
  binary_occupancy,   // mass = number of foreground pixels in the box
  gray_differential,  // mass = max - min intensity in the box
};

/// Strictly decreasing box edge lengths (pixels) for the log-log fit.
class BoxLadder {
 public:
  /// Validates: >= 4 sizes, strictly decreasing, every size in [2, min(w,h)/2].
  BoxLadder(std::vector<std::size_t> sizes, std::size_t image_width, std::size_t image_height);

  std::span<const std::size_t> sizes() const noexcept { return sizes_; }
  std::size_t epsilon0() const noexcept { return sizes_.front(); }

 private:
  std::vector<std::size_t> sizes_;
};

/// Powers of two from the largest one <= min(w, h) / 2 down to 2.
BoxLadder default_ladder(const GrayImage& img);

struct BoxOptions {
  /// Gray mode only: mass = max - min + 1, which occupies every box.
  bool gray_plus_one = false;
  /// Average the fitted dimension over grids anchored at the four image
  /// corners instead of the origin alone.
  bool corner_average = false;
};

/// Grid anchor for box placement. Partial boxes at the far edges count.
enum class GridAnchor { top_left, top_right, bottom_left, bottom_right };

struct BoxMassField {
  std::size_t epsilon = 0;
  std::vector<double> masses;         // one per box, row-major over the grid
  std::vector<double> probabilities;  // masses > 0 normalized to sum 1, same box order
};

/// Per-box measures at one box size. In binary mode `mask` defaults to the
/// Otsu binarization of `img`. Throws degenerate_input when every mass is 0.
BoxMassField box_masses(const GrayImage& img, const BinaryMask* mask, std::size_t epsilon, BoxMode mode,
                        const BoxOptions& options = {}, GridAnchor anchor = GridAnchor::top_left);

/// I(Q, eps) = sum P^Q over occupied boxes; at Q = 1 the entropy form sum P ln P.
double partition_sum(const BoxMassField& field, double q);

struct DimensionFit {
  double dimension = 0.0;
  double r2 = 0.0;
  bool clamped = false;  // binary mode fit left [0, 2] by more than 0.05
};

DimensionFit generalized_dimension(const GrayImage& img, const BinaryMask* mask, const BoxLadder& ladder,
                                   double q, BoxMode mode, const BoxOptions& options = {});

struct FractalSpectrum {
  BoxMode mode = BoxMode::gray_differential;
  std::vector<double> q_values;
  std::vector<double> dimensions;
  std::vector<double> fit_r2;
  std::vector<bool> clamped;
};

inline const std::vector<double> kDefaultQGrid = {-2.0, -1.0, 0.0, 1.0, 2.0};

/// Generalized dimensions over an ascending Q grid using default_ladder(img).
FractalSpectrum spectrum(const GrayImage& img, std::span<const double> q_grid, BoxMode mode,
                         const BinaryMask* mask = nullptr, const BoxOptions& options = {});

/// Writes "q,dq,r2" rows (with header).
void write_spectrum_csv(std::ostream& out, const FractalSpectrum& s);

/// The classification feature: D_0 in gray-differential mode on the default ladder.
double fd_feature(const GrayImage& img);

/// Least-squares line through (x, y); exposed for tests.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace galaxy
