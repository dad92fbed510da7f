#include "tactsim/elastomer.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace tactsim {

void require_valid(const DeformParams& params) {
  if (!(params.d_max > 0.0)) {
    throw std::invalid_argument("d_max must be positive, got " +
                                std::to_string(params.d_max));
  }
  if (params.kernel_size < 3 || params.kernel_size % 2 == 0) {
    throw std::invalid_argument("kernel_size must be odd and >= 3, got " +
                                std::to_string(params.kernel_size));
  }
  // sigma_wide == sigma_narrow is legal and reduces the DoG variant to the
  // single-Gaussian field exactly; only inverted orderings are rejected.
  if (!(params.sigma_narrow > 0.0) || !(params.sigma_wide >= params.sigma_narrow)) {
    throw std::invalid_argument("sigmas must satisfy sigma_wide >= sigma_narrow > 0, got " +
                                std::to_string(params.sigma_narrow) + " / " +
                                std::to_string(params.sigma_wide));
  }
  if (params.steps < 1) {
    throw std::invalid_argument("steps must be >= 1, got " + std::to_string(params.steps));
  }
}

HeightMap threshold_depth(const DepthMap& depth, double d_max) {
  if (!(d_max > 0.0)) {
    throw std::invalid_argument("d_max must be positive, got " + std::to_string(d_max));
  }
  require_valid(depth);
  HeightMap e0(depth.width(), depth.height());
  const std::vector<double>& in = depth.values();
  std::vector<double>& out = e0.values();
  for (std::size_t i = 0; i < in.size(); ++i) {
    out[i] = d_max - std::min(in[i], d_max);
  }
  return e0;
}

HeightMap smooth_heightmap(const HeightMap& e0, int kernel_size, double sigma, int steps) {
  if (steps < 1) {
    throw std::invalid_argument("steps must be >= 1, got " + std::to_string(steps));
  }
  require_valid(e0);
  HeightMap current = e0;
  for (int t = 0; t < steps; ++t) {
    current = gaussian_smooth(current, kernel_size, sigma);
    std::vector<double>& cur = current.values();
    const std::vector<double>& base = e0.values();
    for (std::size_t i = 0; i < cur.size(); ++i) {
      cur[i] = std::max(cur[i], base[i]);
    }
  }
  return current;
}

HeightMap dog_heightmap(const HeightMap& e0, const DeformParams& params) {
  require_valid(params);
  const HeightMap narrow =
      smooth_heightmap(e0, params.kernel_size, params.sigma_narrow, params.steps);
  const HeightMap wide =
      smooth_heightmap(e0, params.kernel_size, params.sigma_wide, params.steps);
  HeightMap out(e0.width(), e0.height());
  std::vector<double>& dst = out.values();
  const std::vector<double>& n = narrow.values();
  const std::vector<double>& w = wide.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = 2.0 * n[i] - w[i];
  }
  return out;
}

HeightMap legacy_masked_smooth(const HeightMap& e0, const DeformParams& params) {
  require_valid(params);
  require_valid(e0);
  HeightMap current = e0;
  for (int t = 0; t < params.steps; ++t) {
    current = gaussian_smooth(current, params.kernel_size, params.sigma_narrow);
  }
  // Single final mask merge: contact pixels keep the raw elevation, the rest
  // keeps the smoothed field. This is the sharp-contour legacy behavior the
  // max-merge variants replace.
  std::vector<double>& cur = current.values();
  const std::vector<double>& base = e0.values();
  for (std::size_t i = 0; i < cur.size(); ++i) {
    if (base[i] > 0.0) cur[i] = base[i];
  }
  return current;
}

HeightMap deform_heightmap(const HeightMap& e0, const DeformParams& params) {
  switch (params.variant) {
    case DeformVariant::BeforeSmoothing:
      require_valid(e0);
      return e0;
    case DeformVariant::SingleGaussian:
      return smooth_heightmap(e0, params.kernel_size, params.sigma_narrow, params.steps);
    case DeformVariant::DifferenceOfGaussians:
      return dog_heightmap(e0, params);
  }
  throw std::invalid_argument("unknown deform variant");
}

}  // namespace tactsim
