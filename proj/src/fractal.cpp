#include "galaxy/fractal.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "galaxy/error.hpp"

namespace galaxy {

BoxLadder::BoxLadder(std::vector<std::size_t> sizes, std::size_t image_width, std::size_t image_height)
    : sizes_(std::move(sizes)) {
  if (sizes_.size() < 4) {
    throw Error(ErrorKind::invalid_argument,
                "box ladder needs at least 4 sizes, got " + std::to_string(sizes_.size()));
  }
  const std::size_t limit = std::min(image_width, image_height) / 2;
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    if (sizes_[i] < 2 || sizes_[i] > limit) {
      throw Error(ErrorKind::invalid_argument, "box size " + std::to_string(sizes_[i]) +
                                                   " outside [2, " + std::to_string(limit) + "]");
    }
    if (i > 0 && sizes_[i] >= sizes_[i - 1]) {
      throw Error(ErrorKind::invalid_argument, "box sizes must be strictly decreasing");
    }
  }
}

BoxLadder default_ladder(const GrayImage& img) {
  const std::size_t min_side = std::min(img.width(), img.height());
  if (min_side < 16) {
    throw Error(ErrorKind::invalid_argument,
                "image too small for box counting: min side " + std::to_string(min_side) + " < 16");
  }
  std::size_t top = 2;
  while (top * 2 <= min_side / 2) top *= 2;
  std::vector<std::size_t> sizes;
  for (std::size_t s = top; s >= 2; s /= 2) sizes.push_back(s);
  if (sizes.size() < 4) {
    throw Error(ErrorKind::invalid_argument, "image too small for box counting: only " +
                                                 std::to_string(sizes.size()) + " box sizes fit");
  }
  return BoxLadder(std::move(sizes), img.width(), img.height());
}

BoxMassField box_masses(const GrayImage& img, const BinaryMask* mask, std::size_t epsilon, BoxMode mode,
                        const BoxOptions& options, GridAnchor anchor) {
  if (epsilon < 2) throw Error(ErrorKind::invalid_argument, "box size must be >= 2");
  std::optional<BinaryMask> own_mask;
  if (mode == BoxMode::binary_occupancy && mask == nullptr) {
    own_mask = binarize(img);
    mask = &*own_mask;
  }
  if (mask != nullptr && (mask->width() != img.width() || mask->height() != img.height())) {
    throw Error(ErrorKind::invalid_argument, "mask dimensions differ from image");
  }

  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const std::size_t grid_cols = (w + epsilon - 1) / epsilon;
  const std::size_t grid_rows = (h + epsilon - 1) / epsilon;
  const bool flip_rows = anchor == GridAnchor::bottom_left || anchor == GridAnchor::bottom_right;
  const bool flip_cols = anchor == GridAnchor::top_right || anchor == GridAnchor::bottom_right;

  BoxMassField field;
  field.epsilon = epsilon;
  field.masses.assign(grid_rows * grid_cols, 0.0);

  if (mode == BoxMode::binary_occupancy) {
    for (std::size_t r = 0; r < h; ++r) {
      const std::size_t box_row = (flip_rows ? h - 1 - r : r) / epsilon;
      for (std::size_t c = 0; c < w; ++c) {
        if (!mask->at(r, c)) continue;
        const std::size_t box_col = (flip_cols ? w - 1 - c : c) / epsilon;
        field.masses[box_row * grid_cols + box_col] += 1.0;
      }
    }
  } else {
    std::vector<std::uint8_t> lo(field.masses.size(), 255);
    std::vector<std::uint8_t> hi(field.masses.size(), 0);
    for (std::size_t r = 0; r < h; ++r) {
      const std::size_t box_row = (flip_rows ? h - 1 - r : r) / epsilon;
      for (std::size_t c = 0; c < w; ++c) {
        const std::size_t box = box_row * grid_cols + (flip_cols ? w - 1 - c : c) / epsilon;
        const std::uint8_t v = img.at(r, c);
        lo[box] = std::min(lo[box], v);
        hi[box] = std::max(hi[box], v);
      }
    }
    const double offset = options.gray_plus_one ? 1.0 : 0.0;
    for (std::size_t b = 0; b < field.masses.size(); ++b) {
      field.masses[b] = static_cast<double>(hi[b] - lo[b]) + offset;
    }
  }

  double total = 0.0;
  for (double m : field.masses) total += m;
  if (total <= 0.0) {
    throw Error(ErrorKind::degenerate_input,
                mode == BoxMode::binary_occupancy
                    ? "degenerate measure: empty mask at box size " + std::to_string(epsilon)
                    : "degenerate measure: constant image at box size " + std::to_string(epsilon));
  }
  for (double m : field.masses) {
    if (m > 0.0) field.probabilities.push_back(m / total);
  }
  return field;
}

double partition_sum(const BoxMassField& field, double q) {
  double sum = 0.0;
  if (q == 1.0) {
    for (double p : field.probabilities) sum += p * std::log(p);
  } else {
    for (double p : field.probabilities) sum += std::pow(p, q);
  }
  return sum;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorKind::invalid_argument, "line fit needs >= 2 paired points");
  }
  const double n = static_cast<double>(x.size());
  double mean_x = 0.0, mean_y = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mean_x += x[i];
    mean_y += y[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mean_x;
    const double dy = y[i] - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw Error(ErrorKind::invalid_argument, "line fit with constant abscissa");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;
  // A constant response is fitted perfectly by a flat line.
  fit.r2 = syy == 0.0 ? 1.0 : std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0);
  return fit;
}

namespace {

DimensionFit fit_at_anchor(const GrayImage& img, const BinaryMask* mask, const BoxLadder& ladder, double q,
                           BoxMode mode, const BoxOptions& options, GridAnchor anchor) {
  const double eps0 = static_cast<double>(ladder.epsilon0());
  std::vector<double> x;
  std::vector<double> y;
  for (std::size_t eps : ladder.sizes()) {
    const BoxMassField field = box_masses(img, mask, eps, mode, options, anchor);
    const double ratio = eps0 / static_cast<double>(eps);
    if (q == 1.0) {
      x.push_back(-std::log(ratio));
      y.push_back(partition_sum(field, q));
    } else {
      x.push_back(std::log(ratio));
      y.push_back(std::log(partition_sum(field, q)));
    }
  }
  const LineFit line = fit_line(x, y);
  DimensionFit out;
  out.dimension = q == 1.0 ? line.slope : line.slope / (1.0 - q);
  out.r2 = line.r2;
  return out;
}

}  // namespace

DimensionFit generalized_dimension(const GrayImage& img, const BinaryMask* mask, const BoxLadder& ladder,
                                   double q, BoxMode mode, const BoxOptions& options) {
  std::optional<BinaryMask> own_mask;
  if (mode == BoxMode::binary_occupancy && mask == nullptr) {
    own_mask = binarize(img);
    mask = &*own_mask;
  }

  DimensionFit fit;
  if (options.corner_average) {
    constexpr GridAnchor anchors[] = {GridAnchor::top_left, GridAnchor::top_right, GridAnchor::bottom_left,
                                      GridAnchor::bottom_right};
    for (GridAnchor anchor : anchors) {
      const DimensionFit f = fit_at_anchor(img, mask, ladder, q, mode, options, anchor);
      fit.dimension += f.dimension / 4.0;
      fit.r2 += f.r2 / 4.0;
    }
  } else {
    fit = fit_at_anchor(img, mask, ladder, q, mode, options, GridAnchor::top_left);
  }

  if (mode == BoxMode::binary_occupancy) {
    fit.clamped = fit.dimension < -0.05 || fit.dimension > 2.05;
    fit.dimension = std::clamp(fit.dimension, 0.0, 2.0);
  }
  return fit;
}

FractalSpectrum spectrum(const GrayImage& img, std::span<const double> q_grid, BoxMode mode,
                         const BinaryMask* mask, const BoxOptions& options) {
  if (q_grid.empty()) throw Error(ErrorKind::invalid_argument, "empty Q grid");
  if (!std::is_sorted(q_grid.begin(), q_grid.end())) {
    throw Error(ErrorKind::invalid_argument, "Q grid must be sorted ascending");
  }
  std::optional<BinaryMask> own_mask;
  if (mode == BoxMode::binary_occupancy && mask == nullptr) {
    own_mask = binarize(img);
    mask = &*own_mask;
  }
  const BoxLadder ladder = default_ladder(img);
  FractalSpectrum s;
  s.mode = mode;
  for (double q : q_grid) {
    const DimensionFit fit = generalized_dimension(img, mask, ladder, q, mode, options);
    s.q_values.push_back(q);
    s.dimensions.push_back(fit.dimension);
    s.fit_r2.push_back(fit.r2);
    s.clamped.push_back(fit.clamped);
  }
  return s;
}

void write_spectrum_csv(std::ostream& out, const FractalSpectrum& s) {
  const auto precision = out.precision(10);
  out << "q,dq,r2\n";
  for (std::size_t i = 0; i < s.q_values.size(); ++i) {
    out << s.q_values[i] << ',' << s.dimensions[i] << ',' << s.fit_r2[i] << '\n';
  }
  out.precision(precision);
}

double fd_feature(const GrayImage& img) {
  return generalized_dimension(img, nullptr, default_ladder(img), 0.0, BoxMode::gray_differential).dimension;
}

}  // namespace galaxy
