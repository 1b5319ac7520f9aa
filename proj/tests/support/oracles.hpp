#pragma once

// Reference implementations used only by tests. Each one takes a different
// (usually brute-force) route from the production code it checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "galaxy/fractal.hpp"
#include "galaxy/random.hpp"
#include "galaxy/raster.hpp"
#include "galaxy/standardize.hpp"

namespace galaxy::oracle {

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, descending.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a, int sweeps = 100) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = a[i][i];
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

/// Unnormalized d x d scatter matrix of `objects`, formed explicitly.
inline std::vector<std::vector<double>> scatter_matrix(const std::vector<std::vector<double>>& objects) {
  const std::size_t d = objects.front().size();
  std::vector<double> mean(d, 0.0);
  for (const auto& o : objects)
    for (std::size_t k = 0; k < d; ++k) mean[k] += o[k] / static_cast<double>(objects.size());
  std::vector<std::vector<double>> c(d, std::vector<double>(d, 0.0));
  for (const auto& o : objects)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) c[i][j] += (o[i] - mean[i]) * (o[j] - mean[j]);
  return c;
}

/// Exhaustive Otsu: for each threshold, split the pixel list and compute the
/// between-class variance from the class means directly.
inline int brute_otsu(const GrayImage& img) {
  double best = 0.0;
  int best_t = -1;
  for (int t = 1; t < 256; ++t) {
    double n0 = 0, n1 = 0, s0 = 0, s1 = 0;
    for (std::uint8_t p : img.pixels()) {
      if (p < t) { n0 += 1; s0 += p; } else { n1 += 1; s1 += p; }
    }
    if (n0 == 0 || n1 == 0) continue;
    const double n = n0 + n1;
    const double w0 = n0 / n, w1 = n1 / n;
    const double d = s0 / n0 - s1 / n1;
    const double v = w0 * w1 * d * d;
    if (v > best * (1 + 1e-12)) {
      best = v;
      best_t = t;
    }
  }
  return best_t;
}

struct Moments {
  double row = 0, col = 0, rr = 0, rc = 0, cc = 0;
};

/// Centroid and second moments by collecting the foreground coordinates first.
inline Moments brute_moments(const BinaryMask& mask) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t r = 0; r < mask.height(); ++r)
    for (std::size_t c = 0; c < mask.width(); ++c)
      if (mask.at(r, c)) pts.emplace_back(static_cast<double>(r), static_cast<double>(c));
  Moments m;
  double sr = 0, sc = 0;
  for (const auto& [r, c] : pts) { sr += r; sc += c; }
  m.row = sr / static_cast<double>(pts.size());
  m.col = sc / static_cast<double>(pts.size());
  for (const auto& [r, c] : pts) {
    m.rr += (r - m.row) * (r - m.row);
    m.rc += (r - m.row) * (c - m.col);
    m.cc += (c - m.col) * (c - m.col);
  }
  return m;
}

/// Box masses by scanning the whole image once per box (O(pixels x boxes)),
/// origin-anchored, row-major box order.
inline std::vector<double> naive_masses(const GrayImage& img, const BinaryMask* mask, std::size_t eps, BoxMode mode) {
  const std::size_t gr = (img.height() + eps - 1) / eps;
  const std::size_t gc = (img.width() + eps - 1) / eps;
  std::vector<double> out;
  for (std::size_t br = 0; br < gr; ++br) {
    for (std::size_t bc = 0; bc < gc; ++bc) {
      double count = 0;
      int lo = 256, hi = -1;
      for (std::size_t r = 0; r < img.height(); ++r) {
        for (std::size_t c = 0; c < img.width(); ++c) {
          if (r / eps != br || c / eps != bc) continue;
          if (mode == BoxMode::binary_occupancy) {
            if (mask->at(r, c)) count += 1;
          } else {
            lo = std::min<int>(lo, img.at(r, c));
            hi = std::max<int>(hi, img.at(r, c));
          }
        }
      }
      out.push_back(mode == BoxMode::binary_occupancy ? count : static_cast<double>(hi - lo));
    }
  }
  return out;
}

/// D_Q from naive masses and a textbook least-squares slope.
inline double naive_dimension(const GrayImage& img, const BinaryMask* mask, const std::vector<std::size_t>& ladder,
                              double q, BoxMode mode) {
  std::vector<double> xs, ys;
  for (std::size_t eps : ladder) {
    const auto m = naive_masses(img, mask, eps, mode);
    double total = 0;
    for (double v : m) total += v;
    double sum = 0;
    for (double v : m) {
      if (v <= 0) continue;
      const double p = v / total;
      sum += q == 1.0 ? p * std::log(p) : std::pow(p, q);
    }
    const double ratio = static_cast<double>(ladder.front()) / static_cast<double>(eps);
    xs.push_back(q == 1.0 ? -std::log(ratio) : std::log(ratio));
    ys.push_back(q == 1.0 ? sum : std::log(sum));
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i]; sy += ys[i]; sxx += xs[i] * xs[i]; sxy += xs[i] * ys[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return q == 1.0 ? slope : slope / (1.0 - q);
}

/// Sierpinski triangle by recursive midpoint subdivision: each square cell
/// keeps its top-left, top-right and bottom-left quarters.
inline void sierpinski_fill(GrayImage& img, std::size_t row, std::size_t col, std::size_t size, int depth) {
  if (depth == 0) {
    for (std::size_t r = row; r < row + size; ++r)
      for (std::size_t c = col; c < col + size; ++c) img.at(r, c) = 255;
    return;
  }
  const std::size_t half = size / 2;
  sierpinski_fill(img, row, col, half, depth - 1);
  sierpinski_fill(img, row, col + half, half, depth - 1);
  sierpinski_fill(img, row + half, col, half, depth - 1);
}

inline GrayImage sierpinski(std::size_t size, int depth) {
  GrayImage img(size, size, 0);
  sierpinski_fill(img, 0, 0, size, depth);
  return img;
}

inline GrayImage random_image(Rng& rng, std::size_t w, std::size_t h) {
  GrayImage img(w, h);
  for (auto& p : img.pixels()) p = static_cast<std::uint8_t>(rng.index(256));
  return img;
}

inline BinaryMask random_mask(Rng& rng, std::size_t w, std::size_t h, double density) {
  BinaryMask m(w, h);
  for (std::size_t r = 0; r < h; ++r)
    for (std::size_t c = 0; c < w; ++c) m.set(r, c, rng.uniform() < density);
  return m;
}

}  // namespace galaxy::oracle
