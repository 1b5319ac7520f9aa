#include "galaxy/raster.hpp"

#include <png.h>

#include <array>
#include <cctype>
#include <fstream>
#include <iterator>
#include <string>

#include "galaxy/error.hpp"

namespace galaxy {

GrayImage::GrayImage(std::size_t width, std::size_t height, std::uint8_t fill)
    : width_(width), height_(height), pixels_(width * height, fill) {
  if (width == 0 || height == 0) {
    throw Error(ErrorKind::invalid_argument, "image dimensions must be positive");
  }
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width == 0 || height == 0) {
    throw Error(ErrorKind::invalid_argument, "image dimensions must be positive");
  }
  if (pixels_.size() != width * height) {
    throw Error(ErrorKind::invalid_argument,
                "pixel buffer holds " + std::to_string(pixels_.size()) + " values, expected " +
                    std::to_string(width * height));
  }
}

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  // 0.299 R + 0.587 G + 0.114 B in thousandths; +500 rounds half up.
  const unsigned weighted = 299u * r + 587u * g + 114u * b;
  return static_cast<std::uint8_t>((weighted + 500u) / 1000u);
}

namespace {

[[noreturn]] void format_error(const std::string& source, std::size_t offset, const std::string& what) {
  throw Error(ErrorKind::format, source + ": " + what + " at byte " + std::to_string(offset));
}

bool is_pgm_space(std::uint8_t c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

class HeaderReader {
 public:
  HeaderReader(std::span<const std::uint8_t> bytes, const std::string& source)
      : bytes_(bytes), source_(source) {}

  std::size_t offset() const { return pos_; }

  // Skips whitespace and '#' comments, then reads a decimal field.
  std::size_t number(const char* field) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > (1u << 30)) format_error(source_, start, std::string("oversized ") + field);
      ++pos_;
    }
    if (pos_ == start) format_error(source_, start, std::string("malformed header: expected ") + field);
    return value;
  }

  void single_space() {
    if (pos_ >= bytes_.size() || !is_pgm_space(bytes_[pos_])) {
      format_error(source_, pos_, "malformed header: expected whitespace after maxval");
    }
    ++pos_;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (is_pgm_space(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  const std::string& source_;
  std::size_t pos_ = 2;
};

bool has_png_signature(std::span<const std::uint8_t> bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

GrayImage decode_png(std::span<const std::uint8_t> bytes, const std::string& source) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    const std::string message = image.message;
    png_image_free(&image);
    format_error(source, 0, "malformed PNG (" + message + ")");
  }
  if (image.format & PNG_FORMAT_FLAG_LINEAR) {
    png_image_free(&image);
    format_error(source, 24, "unsupported bit depth (16-bit PNG)");
  }
  const std::size_t width = image.width;
  const std::size_t height = image.height;
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    format_error(source, 0, "corrupt PNG data (" + message + ")");
  }
  if (!color) return GrayImage(width, height, std::move(buffer));

  std::vector<std::uint8_t> gray(width * height);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    gray[i] = luminance(buffer[3 * i], buffer[3 * i + 1], buffer[3 * i + 2]);
  }
  return GrayImage(width, height, std::move(gray));
}

}  // namespace

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> bytes(header.begin(), header.end());
  bytes.insert(bytes.end(), img.pixels().begin(), img.pixels().end());
  return bytes;
}

GrayImage decode_pgm(std::span<const std::uint8_t> bytes, const std::string& source) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    format_error(source, 0, "unsupported magic");
  }
  HeaderReader reader(bytes, source);
  const std::size_t width = reader.number("width");
  const std::size_t height = reader.number("height");
  const std::size_t maxval_offset = reader.offset();
  const std::size_t maxval = reader.number("maxval");
  if (width == 0 || height == 0) format_error(source, maxval_offset, "malformed header: zero dimension");
  if (maxval != 255) format_error(source, maxval_offset, "unsupported bit depth (maxval " + std::to_string(maxval) + ")");
  reader.single_space();

  const std::size_t start = reader.offset();
  const std::size_t expected = width * height;
  if (bytes.size() - start < expected) {
    format_error(source, bytes.size(), "truncated pixel data (expected " + std::to_string(expected) + " bytes)");
  }
  std::vector<std::uint8_t> pixels(bytes.begin() + static_cast<std::ptrdiff_t>(start),
                                   bytes.begin() + static_cast<std::ptrdiff_t>(start + expected));
  return GrayImage(width, height, std::move(pixels));
}

GrayImage load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, path.string() + ": cannot open file");
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (has_png_signature(bytes)) return decode_png(bytes, path.string());
  return decode_pgm(bytes, path.string());
}

void save_image(const GrayImage& img, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, path.string() + ": cannot open for writing");
  const auto bytes = encode_pgm(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::io, path.string() + ": write failed");
}

}  // namespace galaxy
