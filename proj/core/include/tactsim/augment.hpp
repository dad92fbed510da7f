#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tactsim/elastomer.hpp"
#include "tactsim/illumination.hpp"
#include "tactsim/image.hpp"

namespace tactsim {

/// Grayscale relief texture with values in [0, 1]. Sampling wraps around the
/// borders, so any texture tiles the whole depth map.
struct TextureMap {
  ScalarField values;
  /// Peak-to-peak depth perturbation, meters, used when an AugmentSpec's
  /// amplitude range is left empty.
  double nominal_amplitude = 1.5e-4;
};

/// Random distortion applied to the texture before it is added. All ranges
/// are symmetric about zero (translation, rotation) or spans (scale).
struct Distortion {
  double max_translation_px = 40.0;
  double max_rotation_deg = 180.0;
  double scale_min = 0.75;
  double scale_max = 1.25;
  bool elastic = false;          ///< smooth random warp of the sample grid
  double elastic_amplitude_px = 6.0;
  double elastic_cell_px = 64.0; ///< control-point spacing of the warp field

  friend bool operator==(const Distortion&, const Distortion&) = default;
};

struct AugmentSpec {
  std::vector<TextureMap> textures;  ///< non-empty
  double amplitude_min = 1.5e-4;     ///< drawn amplitude range, meters, >= 0
  double amplitude_max = 1.5e-4;
  Distortion distortion;
  std::uint64_t seed = 0;
};

/// Throws std::invalid_argument on an empty texture list, a negative or
/// inverted amplitude range, texture values outside [0, 1], or an invalid
/// distortion (non-positive scale or elastic cell).
void require_valid(const AugmentSpec& spec);

/// Twelve deterministic built-in relief textures (stripes, grids, rings,
/// dots, weave, and value-noise blotches at several frequencies) at the
/// given size. Values span [0, 1].
std::vector<TextureMap> builtin_textures(int width = 640, int height = 480);

/// Adds one randomly distorted texture to the depth map: draws (texture
/// index, amplitude, translation, rotation, scale, optional warp field) from
/// a generator derived from (spec.seed, draw_index), samples the distorted
/// texture bilinearly with wrap-around, scales it to the drawn amplitude,
/// adds it to the depth values, and clamps the result to >= 0. No pixel
/// moves by more than the drawn amplitude. Deterministic: the same
/// (spec, draw_index) always produces the same map.
DepthMap perturb_depth(const DepthMap& depth, const AugmentSpec& spec,
                       std::uint64_t draw_index);

/// count_per_input perturbed renders of every input depth map, in input-major
/// order (input i, draw j uses draw_index i * count_per_input + j), each
/// pushed through render_tactile with the supplied configs. Reproducible
/// from spec.seed regardless of worker count.
std::vector<TactileImage> augment_batch(const std::vector<DepthMap>& depths,
                                        const AugmentSpec& spec, int count_per_input,
                                        const DeformParams& deform,
                                        const IlluminationConfig& illum);

/// Load a texture from an 8- or 16-bit grayscale (or RGB, averaged) PNG,
/// rescaled to [0, 1] by the channel maximum value. Throws IoError on
/// malformed files.
TextureMap read_texture(const std::string& path);

/// Parse an AugmentSpec from its JSON schema. Texture entries are either the
/// string "builtin" (the twelve built-in maps) or file paths resolved
/// against base_dir. Throws IoError naming the offending field.
AugmentSpec parse_augment_json(const std::string& json_text, const std::string& base_dir);

}  // namespace tactsim
