#pragma once

#include <cassert>
#include <cstdint>
#include <vector>

namespace tactsim {

/// Row-major scalar raster shared by the depth and elevation types.
class ScalarField {
public:
  ScalarField() = default;
  ScalarField(int width, int height, double fill = 0.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }
  double& operator()(int x, int y) {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_[static_cast<std::size_t>(y) * width_ + x];
  }

  /// Clamp-to-edge fetch; the membrane extends past the raster border.
  double at_clamped(int x, int y) const {
    if (x < 0) x = 0;
    if (x >= width_) x = width_ - 1;
    if (y < 0) y = 0;
    if (y >= height_) y = height_ - 1;
    return (*this)(x, y);
  }

  const double* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }
  double* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }

  std::vector<double>& values() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool same_size(const ScalarField& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const ScalarField&, const ScalarField&) = default;

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> data_;
};

/// Per-pixel metric distance from the virtual camera along its axis, meters.
class DepthMap : public ScalarField {
public:
  using ScalarField::ScalarField;
};

/// Per-pixel membrane elevation above the rest plane, meters.
/// 0 = undeformed membrane, positive = protrusion toward the camera.
class HeightMap : public ScalarField {
public:
  using ScalarField::ScalarField;
};

/// Throws std::invalid_argument unless all values are finite and >= 0 and the
/// raster is at least 3x3 (required by the 3-tap derivative kernels).
void require_valid(const DepthMap& depth);

/// Throws std::invalid_argument unless all values are finite and the raster
/// is at least 3x3.
void require_valid(const HeightMap& height);

struct Rgb {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;

  friend constexpr bool operator==(Rgb, Rgb) = default;
};

/// 8-bit RGB raster, interleaved row-major.
class TactileImage {
public:
  TactileImage() = default;
  TactileImage(int width, int height, Rgb fill = {});

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  bool empty() const noexcept { return data_.empty(); }

  Rgb operator()(int x, int y) const {
    const std::uint8_t* p = pixel_ptr(x, y);
    return {p[0], p[1], p[2]};
  }
  void set(int x, int y, Rgb c) {
    std::uint8_t* p = pixel_ptr(x, y);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }

  std::uint8_t channel(int x, int y, int c) const { return pixel_ptr(x, y)[c]; }

  std::vector<std::uint8_t>& bytes() noexcept { return data_; }
  const std::vector<std::uint8_t>& bytes() const noexcept { return data_; }

  friend bool operator==(const TactileImage&, const TactileImage&) = default;

private:
  const std::uint8_t* pixel_ptr(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_.data() + 3 * (static_cast<std::size_t>(y) * width_ + x);
  }
  std::uint8_t* pixel_ptr(int x, int y) {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return data_.data() + 3 * (static_cast<std::size_t>(y) * width_ + x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Square odd-sized convolution kernel.
class Kernel2D {
public:
  /// weights are row-major, size*size entries. Throws on even or non-positive
  /// size or a mismatched weight count.
  Kernel2D(int size, std::vector<double> weights);

  int size() const noexcept { return size_; }
  int radius() const noexcept { return size_ / 2; }

  double operator()(int i, int j) const {
    assert(i >= 0 && i < size_ && j >= 0 && j < size_);
    return weights_[static_cast<std::size_t>(j) * size_ + i];
  }

  const std::vector<double>& weights() const noexcept { return weights_; }

private:
  int size_ = 0;
  std::vector<double> weights_;
};

/// Discretely normalized Gaussian: weights proportional to
/// exp(-(x^2+y^2)/(2 sigma^2)) on the centered integer lattice, rescaled to
/// unit sum. Rejects even or non-positive size and non-positive sigma.
Kernel2D gaussian_kernel(int size, double sigma);

/// Unit-sum 1-D Gaussian taps; the 2-D kernel is their outer product.
std::vector<double> gaussian_taps(int size, double sigma);

/// Discrete 2-D convolution with clamp-to-edge border handling.
HeightMap convolve(const HeightMap& map, const Kernel2D& kernel);

/// Separable Gaussian smoothing (two 1-D passes). Matches
/// convolve(map, gaussian_kernel(size, sigma)) within 1e-9.
HeightMap gaussian_smooth(const HeightMap& map, int size, double sigma);

}  // namespace tactsim
