#include "galaxy/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "galaxy/error.hpp"
#include "galaxy/random.hpp"

namespace galaxy {

void SynthParams::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorKind::invalid_argument, "synth: " + what); };
  if (width < 16 || height < 16) fail("image must be at least 16x16");
  if (!(axis_ratio > 0.0 && axis_ratio <= 1.0)) fail("axis ratio must lie in (0, 1]");
  if (arms < 1) fail("arm count must be >= 1");
  if (blobs < 1) fail("blob count must be >= 1");
  if (!(noise >= 0.0 && noise <= 0.2)) fail("noise amplitude must lie in [0, 0.2]");
  if (!(sky_floor >= 0.0 && sky_floor < 1.0)) fail("sky floor must lie in [0, 1)");
  if (!(brightness > 0.0 && brightness <= 1.0)) fail("brightness must lie in (0, 1]");
  if (!(scale > 0.0 && disk_scale > 0.0 && spread > 0.0)) fail("length scales must be positive");
  if (!(arm_contrast >= 0.0 && arm_contrast <= 1.0)) fail("arm contrast must lie in [0, 1]");
}

namespace {

struct Blob {
  double row, col, sigma, amplitude;
};

}  // namespace

GrayImage generate_galaxy(const SynthParams& p) {
  p.validate();
  Rng rng(p.seed);
  const double center_row = 0.5 * static_cast<double>(p.height - 1);
  const double center_col = 0.5 * static_cast<double>(p.width - 1);
  const double cos_r = std::cos(p.rotation);
  const double sin_r = std::sin(p.rotation);

  std::vector<Blob> blobs;
  if (p.kind == GalaxyClass::irregular) {
    for (int b = 0; b < p.blobs; ++b) {
      // Blob positions are laid out in the galaxy frame, then rotated.
      const double u = rng.normal() * p.spread;
      const double v = rng.normal() * p.spread * 0.6;
      blobs.push_back({center_row + u * sin_r + v * cos_r, center_col + u * cos_r - v * sin_r,
                       rng.uniform(6.0, 16.0), rng.uniform(0.4, 1.0)});
    }
  }
  const double arm_phase = rng.uniform(0.0, 2.0 * std::numbers::pi);

  std::vector<double> field(p.width * p.height, 0.0);
  double peak = 0.0;
  for (std::size_t r = 0; r < p.height; ++r) {
    for (std::size_t c = 0; c < p.width; ++c) {
      const double x = static_cast<double>(c) - center_col;
      const double y = static_cast<double>(r) - center_row;
      const double u = x * cos_r + y * sin_r;   // along the major axis
      const double v = -x * sin_r + y * cos_r;  // along the minor axis
      double value = 0.0;
      switch (p.kind) {
        case GalaxyClass::elliptical: {
          const double rho = std::hypot(u, v / p.axis_ratio);
          value = std::exp(-rho / p.scale);
          break;
        }
        case GalaxyClass::spiral: {
          const double dv = v / p.axis_ratio;
          const double rho = std::hypot(u, dv);
          const double theta = std::atan2(dv, u);
          // Logarithmic spiral: arm crests where theta = ln(1 + rho) / winding + phase.
          const double wave = 0.5 + 0.5 * std::cos(p.arms * (theta - arm_phase - std::log1p(rho) / p.winding));
          const double arm = 1.0 - p.arm_contrast + p.arm_contrast * wave * wave;
          const double disk = std::exp(-rho / p.disk_scale);
          const double bulge = std::exp(-rho / (0.2 * p.disk_scale));
          value = 0.6 * bulge + disk * arm;
          break;
        }
        case GalaxyClass::irregular: {
          for (const Blob& b : blobs) {
            const double dr = static_cast<double>(r) - b.row;
            const double dc = static_cast<double>(c) - b.col;
            value += b.amplitude * std::exp(-(dr * dr + dc * dc) / (2.0 * b.sigma * b.sigma));
          }
          break;
        }
      }
      field[r * p.width + c] = value;
      peak = std::max(peak, value);
    }
  }

  std::vector<std::uint8_t> pixels(field.size(), 0);
  for (std::size_t i = 0; i < field.size(); ++i) {
    double v = peak > 0.0 ? field[i] / peak : 0.0;
    v = std::max(0.0, v - p.sky_floor) / (1.0 - p.sky_floor);
    // Noise lives on the galaxy only; the subtracted sky stays black.
    if (v > 0.0 && p.noise > 0.0) v += p.noise * rng.normal();
    v = std::clamp(v, 0.0, 1.0);
    pixels[i] = static_cast<std::uint8_t>(std::floor(255.0 * p.brightness * v + 0.5));
  }
  return GrayImage(p.width, p.height, std::move(pixels));
}

SynthParams random_params(GalaxyClass kind, std::uint64_t seed, std::size_t size) {
  Rng rng(seed ^ 0x5DEECE66Dull);
  SynthParams p;
  p.kind = kind;
  p.width = p.height = size;
  p.seed = seed;
  const double unit = static_cast<double>(size) / 256.0;
  p.rotation = rng.uniform(-std::numbers::pi / 2, std::numbers::pi / 2);
  p.noise = rng.uniform(0.0, 0.04);
  p.brightness = rng.uniform(0.8, 1.0);
  switch (kind) {
    case GalaxyClass::elliptical:
      p.axis_ratio = rng.uniform(0.45, 0.95);
      p.scale = rng.uniform(24.0, 34.0) * unit;
      break;
    case GalaxyClass::spiral:
      p.axis_ratio = rng.uniform(0.5, 1.0);
      p.arms = 2 + static_cast<int>(rng.index(2));
      p.winding = rng.uniform(0.3, 0.6);
      p.disk_scale = rng.uniform(26.0, 36.0) * unit;
      p.arm_contrast = rng.uniform(0.7, 0.95);
      break;
    case GalaxyClass::irregular:
      p.blobs = 4 + static_cast<int>(rng.index(5));
      p.spread = rng.uniform(30.0, 45.0) * unit;
      break;
  }
  return p;
}

SynthDataset generate_dataset(const std::array<std::size_t, kClassCount>& counts, std::uint64_t base_seed,
                              std::size_t size) {
  std::size_t total = 0;
  for (std::size_t n : counts) total += n;
  if (total == 0) throw Error(ErrorKind::invalid_argument, "synth dataset needs at least one galaxy");
  SynthDataset out;
  std::uint64_t index = 0;
  for (GalaxyClass kind : kAllClasses) {
    for (std::size_t i = 0; i < counts[index_of(kind)]; ++i, ++index) {
      SynthParams p = random_params(kind, base_seed + index, size);
      out.images.push_back(generate_galaxy(p));
      out.labels.push_back(kind);
      out.params.push_back(p);
    }
  }
  return out;
}

}  // namespace galaxy
