#include "tactsim/config.hpp"

#include <cmath>
#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "tactsim/error.hpp"

namespace tactsim {

namespace {

using json = nlohmann::json;

std::string variant_name(DeformVariant v) {
  switch (v) {
    case DeformVariant::SingleGaussian: return "single";
    case DeformVariant::DifferenceOfGaussians: return "dog";
    case DeformVariant::BeforeSmoothing: return "raw";
  }
  throw std::logic_error("unreachable deform variant");
}

DeformVariant variant_from(const std::string& s, const std::string& where) {
  if (s == "single") return DeformVariant::SingleGaussian;
  if (s == "dog") return DeformVariant::DifferenceOfGaussians;
  if (s == "raw") return DeformVariant::BeforeSmoothing;
  throw IoError("invalid config JSON at " + where + ": expected one of single|dog|raw, got '" +
                s + "'");
}

std::string mode_name(AlignMode m) {
  switch (m) {
    case AlignMode::None: return "none";
    case AlignMode::Global: return "global";
    case AlignMode::PerObject: return "per-object";
  }
  throw std::logic_error("unreachable align mode");
}

AlignMode mode_from(const std::string& s, const std::string& where) {
  if (s == "none") return AlignMode::None;
  if (s == "global") return AlignMode::Global;
  if (s == "per-object") return AlignMode::PerObject;
  throw IoError("invalid config JSON at " + where +
                ": expected one of none|global|per-object, got '" + s + "'");
}

[[noreturn]] void fail(const std::string& where, const std::string& why) {
  throw IoError("invalid config JSON at " + where + ": " + why);
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) fail(where, "expected an integer");
  return j.get<int>();
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

std::array<double, 3> get_triple(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 3) fail(where, "expected [x, y, z]");
  std::array<double, 3> out{};
  for (int i = 0; i < 3; ++i) out[i] = get_number(j[i], where);
  return out;
}

/// Visits every key of an object: known keys dispatch, unknown keys either
/// throw or accumulate a warning depending on the strictness switch.
class KeyChecker {
public:
  KeyChecker(bool strict, std::vector<std::string>* warnings)
      : strict_(strict), warnings_(warnings) {}

  void check(const json& obj, const std::string& where,
             std::initializer_list<const char*> known) const {
    for (const auto& [key, value] : obj.items()) {
      (void)value;
      bool found = false;
      for (const char* k : known) {
        if (key == k) {
          found = true;
          break;
        }
      }
      if (found) continue;
      const std::string msg = "unknown key '" + key + "' in " + where;
      if (strict_) throw IoError("invalid config JSON: " + msg);
      if (warnings_ != nullptr) warnings_->push_back(msg);
    }
  }

private:
  bool strict_;
  std::vector<std::string>* warnings_;
};

DeformParams parse_deform(const json& j, const KeyChecker& keys) {
  if (!j.is_object()) fail("deform", "expected an object");
  keys.check(j, "deform",
             {"d_max", "kernel_size", "sigma_narrow", "sigma_wide", "steps", "variant"});
  DeformParams p;
  if (j.contains("d_max")) p.d_max = get_number(j["d_max"], "deform.d_max");
  if (j.contains("kernel_size")) p.kernel_size = get_int(j["kernel_size"], "deform.kernel_size");
  if (j.contains("sigma_narrow")) p.sigma_narrow = get_number(j["sigma_narrow"], "deform.sigma_narrow");
  if (j.contains("sigma_wide")) p.sigma_wide = get_number(j["sigma_wide"], "deform.sigma_wide");
  if (j.contains("steps")) p.steps = get_int(j["steps"], "deform.steps");
  if (j.contains("variant")) {
    p.variant = variant_from(get_string(j["variant"], "deform.variant"), "deform.variant");
  }
  return p;
}

IlluminationConfig parse_illumination(const json& j, const KeyChecker& keys) {
  if (!j.is_object()) fail("illumination", "expected an object");
  keys.check(j, "illumination", {"lights", "ambient", "k_a", "alpha", "pixel_to_meter"});
  IlluminationConfig c = IlluminationConfig::reference();
  if (j.contains("lights")) {
    if (!j["lights"].is_array()) fail("illumination.lights", "expected an array");
    c.lights.clear();
    int index = 0;
    for (const json& entry : j["lights"]) {
      const std::string where = "illumination.lights[" + std::to_string(index) + "]";
      if (!entry.is_object()) fail(where, "expected an object");
      keys.check(entry, where, {"color", "direction", "kd", "ks"});
      for (const char* field : {"color", "direction", "kd", "ks"}) {
        if (!entry.contains(field)) fail(where, "missing '" + std::string(field) + "'");
      }
      const std::array<double, 3> color = get_triple(entry["color"], where + ".color");
      const std::array<double, 3> dir = get_triple(entry["direction"], where + ".direction");
      try {
        c.lights.emplace_back(color, Vec3{dir[0], dir[1], dir[2]},
                              get_number(entry["kd"], where + ".kd"),
                              get_number(entry["ks"], where + ".ks"));
      } catch (const std::invalid_argument& e) {
        fail(where, e.what());
      }
      ++index;
    }
  }
  if (j.contains("ambient")) c.ambient = get_triple(j["ambient"], "illumination.ambient");
  if (j.contains("k_a")) c.k_a = get_number(j["k_a"], "illumination.k_a");
  if (j.contains("alpha")) c.alpha = get_number(j["alpha"], "illumination.alpha");
  if (j.contains("pixel_to_meter")) {
    c.pixel_to_meter = get_number(j["pixel_to_meter"], "illumination.pixel_to_meter");
  }
  try {
    require_valid(c);
  } catch (const std::invalid_argument& e) {
    fail("illumination", e.what());
  }
  return c;
}

AugmentSettings parse_augment_settings(const json& j, const KeyChecker& keys) {
  if (!j.is_object()) fail("augment", "expected an object");
  keys.check(j, "augment", {"textures", "amplitude", "distortion", "seed"});
  AugmentSettings s;
  if (j.contains("textures")) {
    if (!j["textures"].is_array() || j["textures"].empty()) {
      fail("augment.textures", "expected a non-empty array of strings");
    }
    s.textures.clear();
    for (const json& entry : j["textures"]) {
      s.textures.push_back(get_string(entry, "augment.textures[]"));
    }
  }
  if (j.contains("amplitude")) {
    const json& amp = j["amplitude"];
    if (amp.is_number()) {
      s.amplitude_min = s.amplitude_max = amp.get<double>();
    } else if (amp.is_array() && amp.size() == 2) {
      s.amplitude_min = get_number(amp[0], "augment.amplitude[0]");
      s.amplitude_max = get_number(amp[1], "augment.amplitude[1]");
    } else {
      fail("augment.amplitude", "expected a number or [min, max]");
    }
  }
  if (j.contains("distortion")) {
    const json& d = j["distortion"];
    if (!d.is_object()) fail("augment.distortion", "expected an object");
    keys.check(d, "augment.distortion",
               {"max_translation_px", "max_rotation_deg", "scale", "elastic",
                "elastic_amplitude_px", "elastic_cell_px"});
    Distortion& dist = s.distortion;
    if (d.contains("max_translation_px")) {
      dist.max_translation_px = get_number(d["max_translation_px"], "augment.distortion.max_translation_px");
    }
    if (d.contains("max_rotation_deg")) {
      dist.max_rotation_deg = get_number(d["max_rotation_deg"], "augment.distortion.max_rotation_deg");
    }
    if (d.contains("scale")) {
      const json& sc = d["scale"];
      if (!sc.is_array() || sc.size() != 2) fail("augment.distortion.scale", "expected [min, max]");
      dist.scale_min = get_number(sc[0], "augment.distortion.scale[0]");
      dist.scale_max = get_number(sc[1], "augment.distortion.scale[1]");
    }
    if (d.contains("elastic")) {
      if (!d["elastic"].is_boolean()) fail("augment.distortion.elastic", "expected a boolean");
      dist.elastic = d["elastic"].get<bool>();
    }
    if (d.contains("elastic_amplitude_px")) {
      dist.elastic_amplitude_px = get_number(d["elastic_amplitude_px"], "augment.distortion.elastic_amplitude_px");
    }
    if (d.contains("elastic_cell_px")) {
      dist.elastic_cell_px = get_number(d["elastic_cell_px"], "augment.distortion.elastic_cell_px");
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer() && !j["seed"].is_number_unsigned()) {
      fail("augment.seed", "expected an integer");
    }
    s.seed = j["seed"].get<std::uint64_t>();
  }
  return s;
}

CompareSettings parse_compare_settings(const json& j, const KeyChecker& keys) {
  if (!j.is_object()) fail("compare", "expected an object");
  keys.check(j, "compare", {"mode", "annotations"});
  CompareSettings s;
  if (j.contains("mode")) s.mode = mode_from(get_string(j["mode"], "compare.mode"), "compare.mode");
  if (j.contains("annotations")) s.annotations_path = get_string(j["annotations"], "compare.annotations");
  return s;
}

json deform_to_json(const DeformParams& p) {
  json j;
  j["d_max"] = p.d_max;
  j["kernel_size"] = p.kernel_size;
  j["sigma_narrow"] = p.sigma_narrow;
  j["sigma_wide"] = p.sigma_wide;
  j["steps"] = p.steps;
  j["variant"] = variant_name(p.variant);
  return j;
}

json illumination_to_json(const IlluminationConfig& c) {
  json j;
  j["lights"] = json::array();
  for (const LightSource& light : c.lights) {
    json l;
    l["color"] = light.color();
    l["direction"] = {light.direction().x, light.direction().y, light.direction().z};
    l["kd"] = light.kd();
    l["ks"] = light.ks();
    j["lights"].push_back(std::move(l));
  }
  j["ambient"] = c.ambient;
  j["k_a"] = c.k_a;
  j["alpha"] = c.alpha;
  j["pixel_to_meter"] = c.pixel_to_meter;
  return j;
}

json augment_to_json_section(const AugmentSettings& s) {
  json j;
  j["textures"] = s.textures;
  j["amplitude"] = {s.amplitude_min, s.amplitude_max};
  json d;
  d["max_translation_px"] = s.distortion.max_translation_px;
  d["max_rotation_deg"] = s.distortion.max_rotation_deg;
  d["scale"] = {s.distortion.scale_min, s.distortion.scale_max};
  d["elastic"] = s.distortion.elastic;
  d["elastic_amplitude_px"] = s.distortion.elastic_amplitude_px;
  d["elastic_cell_px"] = s.distortion.elastic_cell_px;
  j["distortion"] = std::move(d);
  j["seed"] = s.seed;
  return j;
}

}  // namespace

PipelineConfig default_config() { return PipelineConfig{}; }

PipelineConfig parse_config_json(const std::string& json_text, bool strict_unknown_keys,
                                 std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("invalid config JSON: ") + e.what());
  }
  if (!doc.is_object()) throw IoError("invalid config JSON: top level must be an object");

  const KeyChecker keys(strict_unknown_keys, warnings);
  keys.check(doc, "the top level",
             {"schema_version", "deform", "illumination", "background_path", "scene", "augment",
              "compare"});

  PipelineConfig config;
  if (doc.contains("schema_version")) {
    config.schema_version = get_int(doc["schema_version"], "schema_version");
    if (config.schema_version < 1 || config.schema_version > 1) {
      fail("schema_version", "unsupported version " + std::to_string(config.schema_version) +
                                 " (this build reads version 1)");
    }
  }
  if (doc.contains("deform")) {
    config.deform = parse_deform(doc["deform"], keys);
    try {
      require_valid(config.deform);
    } catch (const std::invalid_argument& e) {
      fail("deform", e.what());
    }
  }
  if (doc.contains("illumination")) {
    config.illumination = parse_illumination(doc["illumination"], keys);
  }
  if (doc.contains("background_path")) {
    config.background_path = get_string(doc["background_path"], "background_path");
  }
  if (doc.contains("scene")) {
    // The scene section shares the standalone scene schema verbatim.
    config.scene = parse_scene_json(doc["scene"].dump());
  }
  if (doc.contains("augment")) {
    config.augment = parse_augment_settings(doc["augment"], keys);
  }
  if (doc.contains("compare")) {
    config.compare = parse_compare_settings(doc["compare"], keys);
  }
  return config;
}

std::string config_to_json(const PipelineConfig& config) {
  json j;
  j["schema_version"] = config.schema_version;
  j["deform"] = deform_to_json(config.deform);
  j["illumination"] = illumination_to_json(config.illumination);
  j["background_path"] = config.background_path;
  j["scene"] = json::parse(scene_to_json(config.scene));
  j["augment"] = augment_to_json_section(config.augment);
  json compare;
  compare["mode"] = mode_name(config.compare.mode);
  compare["annotations"] = config.compare.annotations_path;
  j["compare"] = std::move(compare);
  return j.dump(2) + "\n";
}

AugmentSpec load_augment(const AugmentSettings& settings, const std::string& base_dir) {
  AugmentSpec spec;
  spec.textures.clear();
  for (const std::string& ref : settings.textures) {
    if (ref == "builtin") {
      std::vector<TextureMap> builtin = builtin_textures();
      for (TextureMap& tex : builtin) spec.textures.push_back(std::move(tex));
    } else {
      std::filesystem::path p(ref);
      if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
      spec.textures.push_back(read_texture(p.string()));
    }
  }
  spec.amplitude_min = settings.amplitude_min;
  spec.amplitude_max = settings.amplitude_max;
  spec.distortion = settings.distortion;
  spec.seed = settings.seed;
  try {
    require_valid(spec);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("invalid augmentation settings: ") + e.what());
  }
  return spec;
}

bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
  // The illumination background image is runtime state loaded from
  // background_path; it is intentionally excluded so that serialization
  // round-trips compare equal.
  return a.schema_version == b.schema_version && a.deform == b.deform &&
         a.illumination.lights == b.illumination.lights &&
         a.illumination.ambient == b.illumination.ambient &&
         a.illumination.k_a == b.illumination.k_a &&
         a.illumination.alpha == b.illumination.alpha &&
         a.illumination.pixel_to_meter == b.illumination.pixel_to_meter &&
         a.background_path == b.background_path && a.scene == b.scene &&
         a.augment == b.augment && a.compare == b.compare;
}

}  // namespace tactsim
