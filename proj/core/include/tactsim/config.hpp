#pragma once

#include <string>
#include <vector>

#include "tactsim/augment.hpp"
#include "tactsim/elastomer.hpp"
#include "tactsim/evaluate.hpp"
#include "tactsim/illumination.hpp"
#include "tactsim/scenegen.hpp"

namespace tactsim {

/// Augmentation section as stored in config files: texture references
/// ("builtin" or PNG paths) instead of loaded pixel data.
struct AugmentSettings {
  std::vector<std::string> textures{"builtin"};
  double amplitude_min = 1.5e-4;
  double amplitude_max = 1.5e-4;
  Distortion distortion;
  std::uint64_t seed = 0;

  friend bool operator==(const AugmentSettings&, const AugmentSettings&) = default;
};

/// Comparison defaults for the report commands.
struct CompareSettings {
  AlignMode mode = AlignMode::None;
  std::string annotations_path;  ///< alignment JSON; "" = none

  friend bool operator==(const CompareSettings&, const CompareSettings&) = default;
};

/// Whole-pipeline configuration, serializable to a versioned JSON document.
/// illumination.background is runtime state and never serialized; the
/// background render is referenced by background_path and loaded on use.
struct PipelineConfig {
  int schema_version = 1;
  DeformParams deform;
  IlluminationConfig illumination = IlluminationConfig::reference();
  std::string background_path;  ///< "" = constant ambient triple
  SceneSpec scene;
  AugmentSettings augment;
  CompareSettings compare;
};

/// The embedded baseline configuration (reference sensor defaults).
PipelineConfig default_config();

/// Parse a config JSON document. Missing sections keep their defaults.
/// Unknown keys are errors when strict_unknown_keys is true, otherwise they
/// are appended to *warnings. Rejects schema_version above the supported
/// version. Throws IoError naming the offending field.
PipelineConfig parse_config_json(const std::string& json_text, bool strict_unknown_keys = true,
                                 std::vector<std::string>* warnings = nullptr);

/// Serialize a config. parse_config_json(config_to_json(c)) == c for any
/// valid c (background image data excluded by construction).
std::string config_to_json(const PipelineConfig& config);

/// Materialize the augmentation section: resolves texture references
/// against base_dir ("builtin" expands to the twelve built-in maps) and
/// copies the numeric settings. Throws IoError on unreadable textures.
AugmentSpec load_augment(const AugmentSettings& settings, const std::string& base_dir);

bool operator==(const PipelineConfig& a, const PipelineConfig& b);

}  // namespace tactsim
