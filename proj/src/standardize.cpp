#include "galaxy/standardize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "galaxy/error.hpp"

namespace galaxy {

BinaryMask::BinaryMask(std::size_t width, std::size_t height, bool fill)
    : width_(width), height_(height), bits_(width * height, fill ? 1 : 0) {}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::uint8_t otsu_threshold(const GrayImage& img) {
  std::array<double, 256> hist{};
  for (std::uint8_t p : img.pixels()) hist[p] += 1.0;

  const double total = static_cast<double>(img.size());
  double sum_all = 0.0;
  for (int v = 0; v < 256; ++v) sum_all += v * hist[v];

  // Candidate t splits into {< t} and {>= t}; t = 0 leaves one class empty.
  double weight_below = 0.0;
  double sum_below = 0.0;
  double best_variance = 0.0;
  int best_t = -1;
  for (int t = 1; t < 256; ++t) {
    weight_below += hist[t - 1];
    sum_below += (t - 1) * hist[t - 1];
    const double weight_above = total - weight_below;
    if (weight_below == 0.0 || weight_above == 0.0) continue;
    const double mean_below = sum_below / weight_below;
    const double mean_above = (sum_all - sum_below) / weight_above;
    const double diff = mean_below - mean_above;
    const double variance = weight_below * weight_above * diff * diff;
    if (variance > best_variance) {
      best_variance = variance;
      best_t = t;
    }
  }
  if (best_t < 0) {
    throw Error(ErrorKind::degenerate_input, "constant image: no threshold separates foreground from background");
  }
  return static_cast<std::uint8_t>(best_t);
}

BinaryMask threshold_mask(const GrayImage& img, std::uint8_t threshold) {
  BinaryMask mask(img.width(), img.height());
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t c = 0; c < img.width(); ++c) mask.set(r, c, img.at(r, c) >= threshold);
  }
  return mask;
}

BinaryMask binarize(const GrayImage& img) { return threshold_mask(img, otsu_threshold(img)); }

GalaxyMoments galaxy_moments(const BinaryMask& mask) {
  double n = 0.0;
  double sum_row = 0.0;
  double sum_col = 0.0;
  for (std::size_t r = 0; r < mask.height(); ++r) {
    for (std::size_t c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      n += 1.0;
      sum_row += static_cast<double>(r);
      sum_col += static_cast<double>(c);
    }
  }
  if (n == 0.0) throw Error(ErrorKind::degenerate_input, "empty mask: no galaxy pixels");

  GalaxyMoments m;
  m.centroid_row = sum_row / n;
  m.centroid_col = sum_col / n;
  double rr = 0.0, rc = 0.0, cc = 0.0;
  for (std::size_t r = 0; r < mask.height(); ++r) {
    for (std::size_t c = 0; c < mask.width(); ++c) {
      if (!mask.at(r, c)) continue;
      const double dr = static_cast<double>(r) - m.centroid_row;
      const double dc = static_cast<double>(c) - m.centroid_col;
      rr += dr * dr;
      rc += dr * dc;
      cc += dc * dc;
    }
  }
  m.cov = {{{rr, rc}, {rc, cc}}};
  return m;
}

double principal_angle(const GalaxyMoments& m) {
  const double a = m.cov[0][0];  // row spread
  const double b = m.cov[0][1];
  const double c = m.cov[1][1];  // column spread
  if (a == 0.0 && b == 0.0 && c == 0.0) {
    throw Error(ErrorKind::degenerate_input, "zero covariance: orientation undefined");
  }
  const double half_trace = 0.5 * (a + c);
  const double gap = std::hypot(a - c, 2.0 * b);
  const double lambda_max = half_trace + 0.5 * gap;
  const double lambda_min = half_trace - 0.5 * gap;
  if (gap <= 1e-9 * std::max(std::abs(lambda_max), std::abs(lambda_min))) return 0.0;

  // Eigenvector of the larger eigenvalue as (row, col); pick the better
  // conditioned of the two equivalent forms.
  double vr, vc;
  if (std::abs(lambda_max - c) >= std::abs(lambda_max - a)) {
    vr = lambda_max - c;
    vc = b;
  } else {
    vr = b;
    vc = lambda_max - a;
  }
  double theta = std::atan2(vr, vc);
  if (theta <= -std::numbers::pi / 2) theta += std::numbers::pi;
  if (theta > std::numbers::pi / 2) theta -= std::numbers::pi;
  return theta;
}

namespace {

// Bilinear sample with zero outside the raster.
double sample_zero_fill(const GrayImage& img, double row, double col) {
  const double r0f = std::floor(row);
  const double c0f = std::floor(col);
  const double fr = row - r0f;
  const double fc = col - c0f;
  const auto r0 = static_cast<long>(r0f);
  const auto c0 = static_cast<long>(c0f);
  const auto h = static_cast<long>(img.height());
  const auto w = static_cast<long>(img.width());
  auto px = [&](long r, long c) -> double {
    if (r < 0 || c < 0 || r >= h || c >= w) return 0.0;
    return img.at(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
  };
  return (1 - fr) * ((1 - fc) * px(r0, c0) + fc * px(r0, c0 + 1)) +
         fr * ((1 - fc) * px(r0 + 1, c0) + fc * px(r0 + 1, c0 + 1));
}

std::uint8_t to_pixel(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace

GrayImage rotate_about(const GrayImage& img, double angle, double center_row, double center_col,
                       std::size_t out_width, std::size_t out_height) {
  GrayImage out(out_width, out_height);
  const double cos_t = std::cos(angle);
  const double sin_t = std::sin(angle);
  const double out_center_row = 0.5 * static_cast<double>(out_height - 1);
  const double out_center_col = 0.5 * static_cast<double>(out_width - 1);
  for (std::size_t r = 0; r < out_height; ++r) {
    const double dr = static_cast<double>(r) - out_center_row;
    for (std::size_t c = 0; c < out_width; ++c) {
      const double dc = static_cast<double>(c) - out_center_col;
      // Output +col maps onto the source direction (sin, cos) in (row, col).
      const double src_row = center_row + sin_t * dc + cos_t * dr;
      const double src_col = center_col + cos_t * dc - sin_t * dr;
      out.at(r, c) = to_pixel(sample_zero_fill(img, src_row, src_col));
    }
  }
  return out;
}

GrayImage resize_bilinear(const GrayImage& img, std::size_t out_width, std::size_t out_height) {
  GrayImage out(out_width, out_height);
  const double scale_row = static_cast<double>(img.height()) / static_cast<double>(out_height);
  const double scale_col = static_cast<double>(img.width()) / static_cast<double>(out_width);
  const double max_row = static_cast<double>(img.height() - 1);
  const double max_col = static_cast<double>(img.width() - 1);
  for (std::size_t r = 0; r < out_height; ++r) {
    const double src_row = std::clamp((static_cast<double>(r) + 0.5) * scale_row - 0.5, 0.0, max_row);
    for (std::size_t c = 0; c < out_width; ++c) {
      const double src_col = std::clamp((static_cast<double>(c) + 0.5) * scale_col - 0.5, 0.0, max_col);
      out.at(r, c) = to_pixel(sample_zero_fill(img, src_row, src_col));
    }
  }
  return out;
}

GrayImage crop_background_columns(const GrayImage& img, const BinaryMask& mask) {
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < mask.width(); ++c) {
    for (std::size_t r = 0; r < mask.height(); ++r) {
      if (mask.at(r, c)) {
        keep.push_back(c);
        break;
      }
    }
  }
  if (keep.empty()) throw Error(ErrorKind::degenerate_input, "crop removed every column: mask is empty");
  GrayImage out(keep.size(), img.height());
  for (std::size_t r = 0; r < img.height(); ++r) {
    for (std::size_t k = 0; k < keep.size(); ++k) out.at(r, k) = img.at(r, keep[k]);
  }
  return out;
}

GrayImage standardize(const GrayImage& img) {
  const std::uint8_t threshold = otsu_threshold(img);
  const GalaxyMoments moments = galaxy_moments(threshold_mask(img, threshold));
  const double angle = principal_angle(moments);

  // The canvas is wide enough that the rotated major axis is never clipped;
  // its height depends only on the input extent, not on the orientation.
  const double diagonal = std::hypot(static_cast<double>(img.width()), static_cast<double>(img.height()));
  const auto canvas_width = static_cast<std::size_t>(std::ceil(diagonal));
  const std::size_t canvas_height = std::max(img.width(), img.height());
  const GrayImage rotated =
      rotate_about(img, angle, moments.centroid_row, moments.centroid_col, canvas_width, canvas_height);

  const GrayImage cropped = crop_background_columns(rotated, threshold_mask(rotated, threshold));
  return resize_bilinear(cropped, kStandardSize, kStandardSize);
}

}  // namespace galaxy
