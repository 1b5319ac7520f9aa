#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace galaxy {

/// 8-bit grayscale raster, row-major, 0 = black background.
class GrayImage {
 public:
  /// Constructs a width x height image filled with `fill`.
  GrayImage(std::size_t width, std::size_t height, std::uint8_t fill = 0);
  /// Takes ownership of `pixels`; throws unless pixels.size() == width * height.
  GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  std::uint8_t at(std::size_t row, std::size_t col) const { return pixels_[row * width_ + col]; }
  std::uint8_t& at(std::size_t row, std::size_t col) { return pixels_[row * width_ + col]; }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  std::span<const std::uint8_t> row(std::size_t r) const {
    return std::span<const std::uint8_t>(pixels_).subspan(r * width_, width_);
  }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> pixels_;
};

/// Reads binary PGM (P5, maxval 255) or 8-bit PNG. Color PNGs are reduced to
/// luminance with ITU-R 601 weights, rounded half-up.
GrayImage load_image(const std::filesystem::path& path);

/// Writes binary PGM: "P5\n<w> <h>\n255\n" followed by the raw pixels.
void save_image(const GrayImage& img, const std::filesystem::path& path);

/// PGM encoding/decoding on in-memory buffers. `source` names the buffer in
/// error messages.
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
GrayImage decode_pgm(std::span<const std::uint8_t> bytes, const std::string& source);

/// Round-half-up ITU-R 601 luma of an RGB triple.
std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

}  // namespace galaxy
