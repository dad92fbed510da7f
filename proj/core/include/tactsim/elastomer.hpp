#pragma once

#include "tactsim/image.hpp"

namespace tactsim {

/// Which membrane approximation the pipeline uses.
enum class DeformVariant {
  SingleGaussian,          ///< iterative Gaussian smoothing with max-merge
  DifferenceOfGaussians,   ///< 2 * narrow - wide, raised contour ring
  BeforeSmoothing,         ///< raw thresholded elevation, no smoothing
};

/// Membrane deformation parameters. Defaults reproduce the reference sensor:
/// 30 mm activation distance, 21-tap kernel, sigma 7 (narrow) / 21 (wide),
/// six smoothing passes, difference-of-Gaussians output.
struct DeformParams {
  double d_max = 0.03;       ///< activation depth threshold, meters
  int kernel_size = 21;      ///< odd Gaussian kernel size >= 3, pixels
  double sigma_narrow = 7.0; ///< narrow Gaussian sigma, pixels
  double sigma_wide = 21.0;  ///< wide Gaussian sigma, pixels (DoG only)
  int steps = 6;             ///< smoothing passes T >= 1
  DeformVariant variant = DeformVariant::DifferenceOfGaussians;

  friend bool operator==(const DeformParams&, const DeformParams&) = default;
};

/// Throws std::invalid_argument unless d_max > 0, kernel_size is odd and
/// >= 3, sigma_wide >= sigma_narrow > 0, and steps >= 1. Equal sigmas are
/// legal: they reduce the DoG variant to the single-Gaussian field exactly.
void require_valid(const DeformParams& params);

/// Depth -> elevation activation threshold: E0 = d_max - min(D, d_max).
/// Pixels closer than d_max become positive elevation; everything at or
/// beyond d_max maps to exactly 0. Output values lie in [0, d_max].
/// Throws std::invalid_argument on non-positive d_max or an invalid map.
HeightMap threshold_depth(const DepthMap& depth, double d_max);

/// Iterative membrane smoothing: T passes of Gaussian convolution, each
/// followed by an elementwise max with the original elevation so contact
/// pixels never sink below the indenter surface. The result is >= e0
/// pointwise and decays smoothly away from contacts.
HeightMap smooth_heightmap(const HeightMap& e0, int kernel_size, double sigma, int steps);

/// Difference-of-Gaussians membrane: 2 * H_narrow - H_wide where both
/// branches are smooth_heightmap runs sharing kernel_size and steps and
/// differing only in sigma. Values may dip below 0 just outside the contact
/// (the raised contour ring in elevation terms). Equals the narrow branch
/// exactly when sigma_narrow == sigma_wide.
HeightMap dog_heightmap(const HeightMap& e0, const DeformParams& params);

/// Legacy contact-masked variant kept for comparison: T plain Gaussian
/// convolutions with no per-step merge, then one final masked overwrite that
/// restores e0 wherever e0 > 0. Produces a visible discontinuity at contact
/// boundaries, which the max-merge variants avoid.
HeightMap legacy_masked_smooth(const HeightMap& e0, const DeformParams& params);

/// Dispatch on params.variant: threshold is NOT applied here; e0 must already
/// be an elevation field. BeforeSmoothing returns e0 unchanged.
HeightMap deform_heightmap(const HeightMap& e0, const DeformParams& params);

}  // namespace tactsim
