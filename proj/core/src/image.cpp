#include "tactsim/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tactsim/parallel.hpp"

namespace tactsim {

ScalarField::ScalarField(int width, int height, double fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("raster dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  data_.assign(static_cast<std::size_t>(width) * height, fill);
}

namespace {

void check_field(const ScalarField& field, bool reject_negative, const char* kind) {
  if (field.width() < 3 || field.height() < 3) {
    throw std::invalid_argument(std::string(kind) + " must be at least 3x3, got " +
                                std::to_string(field.width()) + "x" +
                                std::to_string(field.height()));
  }
  for (double v : field.values()) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument(std::string(kind) + " contains a non-finite value");
    }
    if (reject_negative && v < 0.0) {
      throw std::invalid_argument(std::string(kind) + " contains a negative value");
    }
  }
}

}  // namespace

void require_valid(const DepthMap& depth) { check_field(depth, true, "depth map"); }

void require_valid(const HeightMap& height) { check_field(height, false, "height map"); }

TactileImage::TactileImage(int width, int height, Rgb fill)
    : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("image dimensions must be positive, got " +
                                std::to_string(width) + "x" + std::to_string(height));
  }
  data_.resize(3 * static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < data_.size(); i += 3) {
    data_[i] = fill.r;
    data_[i + 1] = fill.g;
    data_[i + 2] = fill.b;
  }
}

Kernel2D::Kernel2D(int size, std::vector<double> weights)
    : size_(size), weights_(std::move(weights)) {
  if (size <= 0 || size % 2 == 0) {
    throw std::invalid_argument("kernel size must be odd and positive, got " +
                                std::to_string(size));
  }
  if (weights_.size() != static_cast<std::size_t>(size) * size) {
    throw std::invalid_argument("kernel expects " + std::to_string(size * size) +
                                " weights, got " + std::to_string(weights_.size()));
  }
}

std::vector<double> gaussian_taps(int size, double sigma) {
  if (size <= 0 || size % 2 == 0) {
    throw std::invalid_argument("Gaussian size must be odd and positive, got " +
                                std::to_string(size));
  }
  if (!(sigma > 0.0)) {
    throw std::invalid_argument("Gaussian sigma must be positive, got " +
                                std::to_string(sigma));
  }
  const int radius = size / 2;
  std::vector<double> taps(static_cast<std::size_t>(size));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    taps[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (double& w : taps) w /= sum;
  return taps;
}

Kernel2D gaussian_kernel(int size, double sigma) {
  const std::vector<double> taps = gaussian_taps(size, sigma);
  std::vector<double> weights(static_cast<std::size_t>(size) * size);
  for (int j = 0; j < size; ++j) {
    for (int i = 0; i < size; ++i) {
      weights[static_cast<std::size_t>(j) * size + i] = taps[j] * taps[i];
    }
  }
  return Kernel2D(size, std::move(weights));
}

HeightMap convolve(const HeightMap& map, const Kernel2D& kernel) {
  require_valid(map);
  const int w = map.width();
  const int h = map.height();
  const int r = kernel.radius();
  HeightMap out(w, h);
  parallel_for_rows(0, h, [&](int y) {
    double* dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      // True convolution: output(x,y) = sum_{i,j} k(i,j) * map(x-i', y-j')
      // over kernel offsets, i.e. the kernel is stamped unflipped by an
      // impulse. Gaussian kernels are symmetric, so this only matters for
      // the impulse-identity contract.
      for (int j = -r; j <= r; ++j) {
        for (int i = -r; i <= r; ++i) {
          acc += kernel(i + r, j + r) * map.at_clamped(x - i, y - j);
        }
      }
      dst[x] = acc;
    }
  });
  return out;
}

namespace {

/// One clamped 1-D convolution pass along x into `out` (same size).
void horizontal_pass(const ScalarField& src, const std::vector<double>& taps,
                     ScalarField& out) {
  const int w = src.width();
  const int h = src.height();
  const int r = static_cast<int>(taps.size()) / 2;
  parallel_for_rows(0, h, [&](int y) {
    const double* in = src.row(y);
    double* dst = out.row(y);
    for (int x = 0; x < w; ++x) dst[x] = 0.0;
    for (int t = -r; t <= r; ++t) {
      const double wgt = taps[static_cast<std::size_t>(t + r)];
      // Interior pixels read in[x - t]; borders replicate the edge sample.
      const int lo = std::max(0, t);
      const int hi = std::min(w, w + t);
      for (int x = 0; x < lo; ++x) dst[x] += wgt * in[0];
      for (int x = lo; x < hi; ++x) dst[x] += wgt * in[x - t];
      for (int x = hi; x < w; ++x) dst[x] += wgt * in[w - 1];
    }
  });
}

/// One clamped 1-D convolution pass along y into `out` (same size).
void vertical_pass(const ScalarField& src, const std::vector<double>& taps,
                   ScalarField& out) {
  const int w = src.width();
  const int h = src.height();
  const int r = static_cast<int>(taps.size()) / 2;
  parallel_for_rows(0, h, [&](int y) {
    double* dst = out.row(y);
    for (int x = 0; x < w; ++x) dst[x] = 0.0;
    for (int t = -r; t <= r; ++t) {
      const double wgt = taps[static_cast<std::size_t>(t + r)];
      int sy = y - t;
      if (sy < 0) sy = 0;
      if (sy >= h) sy = h - 1;
      const double* in = src.row(sy);
      for (int x = 0; x < w; ++x) dst[x] += wgt * in[x];
    }
  });
}

}  // namespace

HeightMap gaussian_smooth(const HeightMap& map, int size, double sigma) {
  require_valid(map);
  const std::vector<double> taps = gaussian_taps(size, sigma);
  HeightMap tmp(map.width(), map.height());
  HeightMap out(map.width(), map.height());
  horizontal_pass(map, taps, tmp);
  vertical_pass(tmp, taps, out);
  return out;
}

}  // namespace tactsim
