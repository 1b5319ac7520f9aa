#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "galaxy/raster.hpp"

namespace galaxy {

/// Foreground mask derived from a GrayImage (true = galaxy pixel).
class BinaryMask {
 public:
  BinaryMask(std::size_t width, std::size_t height, bool fill = false);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }

  bool at(std::size_t row, std::size_t col) const { return bits_[row * width_ + col] != 0; }
  void set(std::size_t row, std::size_t col, bool value) { bits_[row * width_ + col] = value ? 1 : 0; }

  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> bits_;
};

/// Centroid and unnormalized second central moments of a mask.
/// cov is indexed [row-axis, col-axis]: cov[0][0] sums (i - ī)², cov[1][1] sums (j - j̄)².
struct GalaxyMoments {
  double centroid_row = 0.0;
  double centroid_col = 0.0;
  std::array<std::array<double, 2>, 2> cov{};
};

/// Otsu threshold over the 256-bin histogram. Returns t such that foreground
/// is `pixel >= t`; the smallest maximizer of between-class variance wins.
/// Throws degenerate_input for constant images.
std::uint8_t otsu_threshold(const GrayImage& img);

BinaryMask threshold_mask(const GrayImage& img, std::uint8_t threshold);

/// threshold_mask(img, otsu_threshold(img)).
BinaryMask binarize(const GrayImage& img);

GalaxyMoments galaxy_moments(const BinaryMask& mask);

/// Orientation of the dominant eigenvector of `m.cov`, measured from the
/// column axis towards increasing row, canonicalized to (-pi/2, pi/2].
/// Isotropic covariances (equal eigenvalues) return 0.
double principal_angle(const GalaxyMoments& m);

inline constexpr std::size_t kStandardSize = 128;

/// Samples `img` rotated by -angle about (center_row, center_col) onto a
/// canvas of out_width x out_height whose center receives the rotation
/// center. Bilinear interpolation, zero fill outside the source.
GrayImage rotate_about(const GrayImage& img, double angle, double center_row, double center_col,
                       std::size_t out_width, std::size_t out_height);

/// Bilinear stretch to an arbitrary size (pixel-center aligned).
GrayImage resize_bilinear(const GrayImage& img, std::size_t out_width, std::size_t out_height);

/// Drops every column whose mask is entirely background.
GrayImage crop_background_columns(const GrayImage& img, const BinaryMask& mask);

/// Full standardization: threshold, orient by the moment covariance, rotate
/// the major axis onto the horizontal, crop background columns and stretch to
/// 128x128.
GrayImage standardize(const GrayImage& img);

}  // namespace galaxy
