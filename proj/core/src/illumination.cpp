#include "tactsim/illumination.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tactsim/parallel.hpp"

namespace tactsim {

NormalMap::NormalMap(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("normal map dimensions must be positive");
  }
  const std::size_t n = static_cast<std::size_t>(width) * height;
  nx_.assign(n, 0.0);
  ny_.assign(n, 0.0);
  nz_.assign(n, 1.0);
}

LightSource::LightSource(std::array<double, 3> color, Vec3 direction, double kd, double ks)
    : color_(color), kd_(kd), ks_(ks) {
  for (double c : color) {
    if (!(c >= 0.0 && c <= 255.0)) {
      throw std::invalid_argument("light color channels must be in [0, 255]");
    }
  }
  if (!(kd >= 0.0 && kd <= 1.0) || !(ks >= 0.0 && ks <= 1.0)) {
    throw std::invalid_argument("light kd/ks must be in [0, 1]");
  }
  const double n = norm(direction);
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw std::invalid_argument("light direction must be a non-zero vector");
  }
  // Already-unit vectors pass through untouched so that re-normalizing a
  // serialized direction is bit-exact (normalization is not otherwise
  // idempotent in floating point).
  direction_ = std::abs(n - 1.0) <= 1e-12
                   ? direction
                   : Vec3{direction.x / n, direction.y / n, direction.z / n};
}

std::vector<LightSource> default_lights() {
  return {
      LightSource({255.0, 255.0, 255.0}, {0.0, 1.0, 0.25}, 0.6, 0.5),   // white, top
      LightSource({115.0, 130.0, 255.0}, {-1.0, 0.0, 0.25}, 0.5, 0.3),  // blue, right
      LightSource({225.0, 82.0, 108.0}, {0.0, -1.0, 0.25}, 0.6, 0.4),   // red, bottom
      LightSource({153.0, 255.0, 120.0}, {1.0, 0.0, 0.25}, 0.1, 0.1),   // green, left
  };
}

IlluminationConfig IlluminationConfig::reference() {
  IlluminationConfig config;
  config.lights = default_lights();
  return config;
}

void require_valid(const IlluminationConfig& config) {
  if (!(config.k_a >= 0.0 && config.k_a <= 1.0)) {
    throw std::invalid_argument("k_a must be in [0, 1], got " + std::to_string(config.k_a));
  }
  if (!(config.alpha > 0.0)) {
    throw std::invalid_argument("alpha must be positive, got " +
                                std::to_string(config.alpha));
  }
  if (!(config.pixel_to_meter > 0.0)) {
    throw std::invalid_argument("pixel_to_meter must be positive, got " +
                                std::to_string(config.pixel_to_meter));
  }
  for (double c : config.ambient) {
    if (!(c >= 0.0 && c <= 255.0)) {
      throw std::invalid_argument("ambient channels must be in [0, 255]");
    }
  }
}

NormalMap surface_normals(const HeightMap& height, double pixel_to_meter) {
  if (!(pixel_to_meter > 0.0)) {
    throw std::invalid_argument("pixel_to_meter must be positive, got " +
                                std::to_string(pixel_to_meter));
  }
  require_valid(height);
  const int w = height.width();
  const int h = height.height();
  const double inv2r = 1.0 / (2.0 * pixel_to_meter);
  NormalMap normals(w, h);
  parallel_for_rows(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double gx = (height.at_clamped(x + 1, y) - height.at_clamped(x - 1, y)) * inv2r;
      const double gy = (height.at_clamped(x, y + 1) - height.at_clamped(x, y - 1)) * inv2r;
      // Raw normal (-dh/dx, -dh/dy, 1): +z faces the camera.
      const double inv_len = 1.0 / std::sqrt(gx * gx + gy * gy + 1.0);
      normals.set(x, y, {-gx * inv_len, -gy * inv_len, inv_len});
    }
  });
  return normals;
}

namespace {

/// max(base, 0)^alpha with a multiply chain for small integer exponents
/// (the default alpha = 5 avoids three std::pow calls per pixel).
inline double spec_pow(double base, double alpha, int int_alpha) {
  if (base <= 0.0) return 0.0;
  if (int_alpha > 0) {
    double acc = 1.0;
    double term = base;
    int e = int_alpha;
    while (e > 0) {
      if (e & 1) acc *= term;
      term *= term;
      e >>= 1;
    }
    return acc;
  }
  return std::pow(base, alpha);
}

}  // namespace

TactileImage phong_render(const NormalMap& normals, const IlluminationConfig& config) {
  require_valid(config);
  const int w = normals.width();
  const int h = normals.height();
  if (w <= 0 || h <= 0) {
    throw std::invalid_argument("cannot shade an empty normal map");
  }
  if (config.background &&
      (config.background->width() != w || config.background->height() != h)) {
    throw std::invalid_argument("background image size " +
                                std::to_string(config.background->width()) + "x" +
                                std::to_string(config.background->height()) +
                                " does not match render size " + std::to_string(w) + "x" +
                                std::to_string(h));
  }

  // Light directions arrive in the sensor frame, rotated 180 degrees about
  // the optical axis relative to image coordinates: flip x and y once here.
  struct PreparedLight {
    Vec3 dir;
    std::array<double, 3> color;
    double kd, ks;
  };
  std::vector<PreparedLight> lights;
  lights.reserve(config.lights.size());
  for (const LightSource& l : config.lights) {
    lights.push_back({{-l.direction().x, -l.direction().y, l.direction().z},
                      l.color(),
                      l.kd(),
                      l.ks()});
  }

  const bool integral_alpha =
      config.alpha == std::floor(config.alpha) && config.alpha <= 64.0;
  const int int_alpha = integral_alpha ? static_cast<int>(config.alpha) : 0;

  TactileImage image(w, h);
  parallel_for_rows(0, h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 n = normals(x, y);
      double acc[3];
      if (config.background) {
        const Rgb bg = (*config.background)(x, y);
        acc[0] = config.k_a * bg.r;
        acc[1] = config.k_a * bg.g;
        acc[2] = config.k_a * bg.b;
      } else {
        acc[0] = config.k_a * config.ambient[0];
        acc[1] = config.k_a * config.ambient[1];
        acc[2] = config.k_a * config.ambient[2];
      }
      for (const PreparedLight& l : lights) {
        const double d = l.dir.x * n.x + l.dir.y * n.y + l.dir.z * n.z;
        const double diffuse = d > 0.0 ? d : 0.0;
        // R.V with V = (0,0,1) collapses to R_z = 2 (L.N) n_z - L_z.
        const double rv = 2.0 * d * n.z - l.dir.z;
        const double specular = spec_pow(rv, config.alpha, int_alpha);
        const double weight = l.kd * diffuse + l.ks * specular;
        acc[0] += weight * l.color[0];
        acc[1] += weight * l.color[1];
        acc[2] += weight * l.color[2];
      }
      Rgb out;
      for (int c = 0; c < 3; ++c) {
        double v = acc[c];
        if (v < 0.0) v = 0.0;
        if (v > 255.0) v = 255.0;
        acc[c] = v;
      }
      out.r = static_cast<std::uint8_t>(std::lround(acc[0]));
      out.g = static_cast<std::uint8_t>(std::lround(acc[1]));
      out.b = static_cast<std::uint8_t>(std::lround(acc[2]));
      image.set(x, y, out);
    }
  });
  return image;
}

TactileImage render_tactile(const DepthMap& depth, const DeformParams& deform,
                            const IlluminationConfig& illum) {
  const HeightMap e0 = threshold_depth(depth, deform.d_max);
  const HeightMap surface = deform_heightmap(e0, deform);
  const NormalMap normals = surface_normals(surface, illum.pixel_to_meter);
  return phong_render(normals, illum);
}

double calibrate_pixel_to_meter(double pixel_span, double object_side) {
  if (!(pixel_span > 0.0)) {
    throw std::invalid_argument("pixel span must be positive, got " +
                                std::to_string(pixel_span));
  }
  if (!(object_side > 0.0)) {
    throw std::invalid_argument("object side must be positive, got " +
                                std::to_string(object_side));
  }
  return object_side / pixel_span;
}

int contact_span(const HeightMap& e0, int row) {
  require_valid(e0);
  if (row < 0 || row >= e0.height()) {
    throw std::invalid_argument("row " + std::to_string(row) + " outside height map of " +
                                std::to_string(e0.height()) + " rows");
  }
  int first = -1;
  int last = -1;
  for (int x = 0; x < e0.width(); ++x) {
    if (e0(x, row) > 0.0) {
      if (first < 0) first = x;
      last = x;
    }
  }
  return first < 0 ? 0 : last - first + 1;
}

}  // namespace tactsim
