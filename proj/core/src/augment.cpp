#include "tactsim/augment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "tactsim/error.hpp"
#include "tactsim/image_io.hpp"

namespace tactsim {

namespace {

using json = nlohmann::json;

/// Stateless splitmix64 finalizer: the portable seed mixer.
std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Generator for one (seed, draw_index) pair. mt19937_64's output sequence
/// is fixed by the standard, so draws are portable across platforms.
std::mt19937_64 draw_engine(std::uint64_t seed, std::uint64_t draw_index) {
  return std::mt19937_64(splitmix(splitmix(seed) ^ draw_index));
}

/// Uniform double in [0, 1) with portable bit-exact semantics (the standard
/// distributions are implementation-defined, so they are avoided).
double u01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform in [-1, 1].
double u11(std::mt19937_64& rng) { return 2.0 * u01(rng) - 1.0; }

double wrap_index(double v, int n) {
  const double m = std::fmod(v, static_cast<double>(n));
  return m < 0.0 ? m + n : m;
}

/// Bilinear fetch with wrap-around addressing.
double sample_wrapped(const ScalarField& tex, double sx, double sy) {
  const double fx = wrap_index(sx, tex.width());
  const double fy = wrap_index(sy, tex.height());
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const int x1 = (x0 + 1) % tex.width();
  const int y1 = (y0 + 1) % tex.height();
  const double ax = fx - x0;
  const double ay = fy - y0;
  const double top = (1.0 - ax) * tex(x0, y0) + ax * tex(x1, y0);
  const double bot = (1.0 - ax) * tex(x0, y1) + ax * tex(x1, y1);
  return (1.0 - ay) * top + ay * bot;
}

/// Coarse random displacement field bilinearly upsampled to pixel coords.
struct ElasticField {
  int gw = 0, gh = 0;
  double cell = 1.0;
  std::vector<double> dx, dy;

  Vec2 at(double x, double y) const {
    const double gx = std::clamp(x / cell, 0.0, gw - 1.0000001);
    const double gy = std::clamp(y / cell, 0.0, gh - 1.0000001);
    const int x0 = std::min(static_cast<int>(gx), gw - 2);
    const int y0 = std::min(static_cast<int>(gy), gh - 2);
    const double ax = gx - x0;
    const double ay = gy - y0;
    const auto idx = [this](int i, int j) { return static_cast<std::size_t>(j) * gw + i; };
    const double ddx = (1 - ay) * ((1 - ax) * dx[idx(x0, y0)] + ax * dx[idx(x0 + 1, y0)]) +
                       ay * ((1 - ax) * dx[idx(x0, y0 + 1)] + ax * dx[idx(x0 + 1, y0 + 1)]);
    const double ddy = (1 - ay) * ((1 - ax) * dy[idx(x0, y0)] + ax * dy[idx(x0 + 1, y0)]) +
                       ay * ((1 - ax) * dy[idx(x0, y0 + 1)] + ax * dy[idx(x0 + 1, y0 + 1)]);
    return {ddx, ddy};
  }
};

}  // namespace

void require_valid(const AugmentSpec& spec) {
  if (spec.textures.empty()) {
    throw std::invalid_argument("augmentation requires a non-empty texture list");
  }
  for (const TextureMap& tex : spec.textures) {
    if (tex.values.empty()) {
      throw std::invalid_argument("augmentation texture is empty");
    }
    for (double v : tex.values.values()) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw std::invalid_argument("texture values must lie in [0, 1]");
      }
    }
    if (!(tex.nominal_amplitude >= 0.0)) {
      throw std::invalid_argument("texture nominal amplitude must be >= 0");
    }
  }
  if (!(spec.amplitude_min >= 0.0) || !(spec.amplitude_max >= spec.amplitude_min)) {
    throw std::invalid_argument("amplitude range must satisfy 0 <= min <= max");
  }
  const Distortion& d = spec.distortion;
  if (!(d.max_translation_px >= 0.0) || !(d.max_rotation_deg >= 0.0)) {
    throw std::invalid_argument("distortion ranges must be >= 0");
  }
  if (!(d.scale_min > 0.0) || !(d.scale_max >= d.scale_min)) {
    throw std::invalid_argument("distortion scale range must satisfy 0 < min <= max");
  }
  if (d.elastic && (!(d.elastic_cell_px > 0.0) || !(d.elastic_amplitude_px >= 0.0))) {
    throw std::invalid_argument("elastic warp needs cell > 0 and amplitude >= 0");
  }
}

DepthMap perturb_depth(const DepthMap& depth, const AugmentSpec& spec,
                       std::uint64_t draw_index) {
  require_valid(spec);
  require_valid(depth);
  std::mt19937_64 rng = draw_engine(spec.seed, draw_index);

  // Frozen draw order: texture index, amplitude, translation x, translation
  // y, rotation, scale, then the elastic control grid (x then y per point,
  // row-major). Changing this order would silently re-randomize every
  // seeded corpus, so it is part of the output contract.
  const std::size_t tex_count = spec.textures.size();
  std::size_t tex_index =
      static_cast<std::size_t>(u01(rng) * static_cast<double>(tex_count));
  if (tex_index >= tex_count) tex_index = tex_count - 1;
  const TextureMap& texture = spec.textures[tex_index];

  const double amplitude =
      spec.amplitude_min + u01(rng) * (spec.amplitude_max - spec.amplitude_min);
  const Distortion& dist = spec.distortion;
  const double tx = u11(rng) * dist.max_translation_px;
  const double ty = u11(rng) * dist.max_translation_px;
  const double rot_rad = u11(rng) * dist.max_rotation_deg * std::numbers::pi / 180.0;
  const double scale = dist.scale_min + u01(rng) * (dist.scale_max - dist.scale_min);

  const int w = depth.width();
  const int h = depth.height();
  ElasticField warp;
  if (dist.elastic) {
    warp.cell = dist.elastic_cell_px;
    warp.gw = std::max(2, static_cast<int>(std::ceil(w / warp.cell)) + 1);
    warp.gh = std::max(2, static_cast<int>(std::ceil(h / warp.cell)) + 1);
    const std::size_t n = static_cast<std::size_t>(warp.gw) * warp.gh;
    warp.dx.resize(n);
    warp.dy.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      warp.dx[i] = u11(rng) * dist.elastic_amplitude_px;
      warp.dy[i] = u11(rng) * dist.elastic_amplitude_px;
    }
  }

  // The texture is mapped image-center to texture-center, rotated and scaled
  // about the center, then shifted; sampling inverts that per pixel.
  const double icx = (w - 1) / 2.0;
  const double icy = (h - 1) / 2.0;
  const double tcx = (texture.values.width() - 1) / 2.0;
  const double tcy = (texture.values.height() - 1) / 2.0;
  const double cos_r = std::cos(rot_rad);
  const double sin_r = std::sin(rot_rad);
  const double inv_scale = 1.0 / scale;

  DepthMap out(w, h);
  for (int y = 0; y < h; ++y) {
    const double* src = depth.row(y);
    double* dst = out.row(y);
    for (int x = 0; x < w; ++x) {
      double px = x - icx - tx;
      double py = y - icy - ty;
      if (dist.elastic) {
        const Vec2 d = warp.at(static_cast<double>(x), static_cast<double>(y));
        px += d.x;
        py += d.y;
      }
      // inverse rotation (angle -rot) and inverse scale about the center
      const double sx = (cos_r * px + sin_r * py) * inv_scale + tcx;
      const double sy = (-sin_r * px + cos_r * py) * inv_scale + tcy;
      const double t = sample_wrapped(texture.values, sx, sy);
      dst[x] = std::max(src[x] + amplitude * t, 0.0);
    }
  }
  return out;
}

std::vector<TactileImage> augment_batch(const std::vector<DepthMap>& depths,
                                        const AugmentSpec& spec, int count_per_input,
                                        const DeformParams& deform,
                                        const IlluminationConfig& illum) {
  if (count_per_input < 0) {
    throw std::invalid_argument("count_per_input must be >= 0");
  }
  require_valid(spec);
  std::vector<TactileImage> images;
  images.reserve(depths.size() * static_cast<std::size_t>(count_per_input));
  // Items run sequentially; each render is internally row-parallel, and the
  // per-item generators depend only on (seed, index), so the corpus is
  // byte-identical for any worker count.
  for (std::size_t i = 0; i < depths.size(); ++i) {
    for (int j = 0; j < count_per_input; ++j) {
      const std::uint64_t draw = i * static_cast<std::uint64_t>(count_per_input) + j;
      const DepthMap perturbed = perturb_depth(depths[i], spec, draw);
      images.push_back(render_tactile(perturbed, deform, illum));
    }
  }
  return images;
}

namespace {

double fractional(double v) { return v - std::floor(v); }

/// Deterministic lattice value noise in [0, 1] with the given cell size.
double value_noise(int x, int y, int cell, std::uint64_t salt) {
  const int gx = x / cell;
  const int gy = y / cell;
  const double fx = static_cast<double>(x % cell) / cell;
  const double fy = static_cast<double>(y % cell) / cell;
  const auto corner = [salt](int i, int j) {
    const std::uint64_t k =
        splitmix(salt ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32 |
                         static_cast<std::uint32_t>(j)));
    return static_cast<double>(k >> 11) * 0x1.0p-53;
  };
  const double sx = fx * fx * (3.0 - 2.0 * fx);  // smoothstep
  const double sy = fy * fy * (3.0 - 2.0 * fy);
  const double top = (1.0 - sx) * corner(gx, gy) + sx * corner(gx + 1, gy);
  const double bot = (1.0 - sx) * corner(gx, gy + 1) + sx * corner(gx + 1, gy + 1);
  return (1.0 - sy) * top + sy * bot;
}

}  // namespace

std::vector<TextureMap> builtin_textures(int width, int height) {
  if (width < 3 || height < 3) {
    throw std::invalid_argument("texture size must be at least 3x3");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  std::vector<TextureMap> maps;
  maps.reserve(12);

  const auto make = [&](auto&& fn) {
    TextureMap tex;
    tex.values = ScalarField(width, height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        tex.values(x, y) = std::clamp(fn(x, y), 0.0, 1.0);
      }
    }
    maps.push_back(std::move(tex));
  };

  const double cx = (width - 1) / 2.0;
  const double cy = (height - 1) / 2.0;

  // 1-4: sine stripes, two orientations x two frequencies
  make([&](int x, int) { return 0.5 + 0.5 * std::sin(two_pi * x / 8.0); });
  make([&](int, int y) { return 0.5 + 0.5 * std::sin(two_pi * y / 8.0); });
  make([&](int x, int) { return 0.5 + 0.5 * std::sin(two_pi * x / 24.0); });
  make([&](int, int y) { return 0.5 + 0.5 * std::sin(two_pi * y / 24.0); });
  // 5: diagonal weave
  make([&](int x, int y) { return 0.5 + 0.5 * std::sin(two_pi * (x + y) / 16.0); });
  // 6: checkerboard
  make([&](int x, int y) { return ((x / 8 + y / 8) % 2 == 0) ? 1.0 : 0.0; });
  // 7: grid lines
  make([&](int x, int y) { return (x % 16 < 2 || y % 16 < 2) ? 1.0 : 0.0; });
  // 8: concentric rings
  make([&](int x, int y) {
    return 0.5 + 0.5 * std::sin(two_pi * std::hypot(x - cx, y - cy) / 12.0);
  });
  // 9: dot lattice with smooth falloff
  make([&](int x, int y) {
    const double dx = fractional(x / 16.0) - 0.5;
    const double dy = fractional(y / 16.0) - 0.5;
    const double r = std::hypot(dx, dy) * 16.0;
    return std::max(0.0, 1.0 - r / 5.0);
  });
  // 10-12: value-noise blotches at three scales
  make([&](int x, int y) { return value_noise(x, y, 8, 0xA11CE5u); });
  make([&](int x, int y) { return value_noise(x, y, 16, 0xB22DF6u); });
  make([&](int x, int y) { return value_noise(x, y, 32, 0xC33E07u); });
  return maps;
}

TextureMap read_texture(const std::string& path) {
  const TactileImage rgb = read_rgb(path);
  TextureMap tex;
  tex.values = ScalarField(rgb.width(), rgb.height());
  for (int y = 0; y < rgb.height(); ++y) {
    for (int x = 0; x < rgb.width(); ++x) {
      const Rgb c = rgb(x, y);
      tex.values(x, y) =
          (static_cast<double>(c.r) + c.g + c.b) / (3.0 * 255.0);
    }
  }
  return tex;
}

AugmentSpec parse_augment_json(const std::string& json_text, const std::string& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("invalid augment JSON: ") + e.what());
  }
  if (!doc.is_object()) throw IoError("invalid augment JSON: top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "textures" && key != "amplitude" && key != "distortion" && key != "seed") {
      throw IoError("invalid augment JSON: unknown key '" + key + "'");
    }
  }

  AugmentSpec spec;
  spec.textures.clear();
  if (doc.contains("textures")) {
    if (!doc["textures"].is_array() || doc["textures"].empty()) {
      throw IoError("invalid augment JSON: 'textures' must be a non-empty array");
    }
    for (const json& entry : doc["textures"]) {
      if (!entry.is_string()) {
        throw IoError("invalid augment JSON: texture entries must be strings");
      }
      const std::string ref = entry.get<std::string>();
      if (ref == "builtin") {
        std::vector<TextureMap> builtin = builtin_textures();
        for (TextureMap& tex : builtin) spec.textures.push_back(std::move(tex));
      } else {
        std::filesystem::path p(ref);
        if (p.is_relative() && !base_dir.empty()) p = std::filesystem::path(base_dir) / p;
        spec.textures.push_back(read_texture(p.string()));
      }
    }
  } else {
    spec.textures = builtin_textures();
  }

  if (doc.contains("amplitude")) {
    const json& amp = doc["amplitude"];
    if (amp.is_number()) {
      spec.amplitude_min = spec.amplitude_max = amp.get<double>();
    } else if (amp.is_array() && amp.size() == 2 && amp[0].is_number() && amp[1].is_number()) {
      spec.amplitude_min = amp[0].get<double>();
      spec.amplitude_max = amp[1].get<double>();
    } else {
      throw IoError("invalid augment JSON: 'amplitude' must be a number or [min, max]");
    }
  }

  if (doc.contains("distortion")) {
    const json& d = doc["distortion"];
    if (!d.is_object()) throw IoError("invalid augment JSON: 'distortion' must be an object");
    for (const auto& [key, value] : d.items()) {
      (void)value;
      if (key != "max_translation_px" && key != "max_rotation_deg" && key != "scale" &&
          key != "elastic" && key != "elastic_amplitude_px" && key != "elastic_cell_px") {
        throw IoError("invalid augment JSON: unknown distortion key '" + key + "'");
      }
    }
    Distortion& dist = spec.distortion;
    if (d.contains("max_translation_px")) dist.max_translation_px = d["max_translation_px"].get<double>();
    if (d.contains("max_rotation_deg")) dist.max_rotation_deg = d["max_rotation_deg"].get<double>();
    if (d.contains("scale")) {
      const json& s = d["scale"];
      if (!s.is_array() || s.size() != 2) {
        throw IoError("invalid augment JSON: distortion 'scale' must be [min, max]");
      }
      dist.scale_min = s[0].get<double>();
      dist.scale_max = s[1].get<double>();
    }
    if (d.contains("elastic")) dist.elastic = d["elastic"].get<bool>();
    if (d.contains("elastic_amplitude_px")) dist.elastic_amplitude_px = d["elastic_amplitude_px"].get<double>();
    if (d.contains("elastic_cell_px")) dist.elastic_cell_px = d["elastic_cell_px"].get<double>();
  }

  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned() && !doc["seed"].is_number_integer()) {
      throw IoError("invalid augment JSON: 'seed' must be an integer");
    }
    spec.seed = doc["seed"].get<std::uint64_t>();
  }

  try {
    require_valid(spec);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("invalid augment JSON: ") + e.what());
  }
  return spec;
}

}  // namespace tactsim
