#pragma once

#include <array>
#include <optional>
#include <vector>

#include "tactsim/elastomer.hpp"
#include "tactsim/image.hpp"
#include "tactsim/vec.hpp"

namespace tactsim {

/// Per-pixel unit surface normals, stored as three row-major planes.
class NormalMap {
public:
  NormalMap() = default;
  NormalMap(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  Vec3 operator()(int x, int y) const {
    const std::size_t i = index(x, y);
    return {nx_[i], ny_[i], nz_[i]};
  }
  void set(int x, int y, Vec3 n) {
    const std::size_t i = index(x, y);
    nx_[i] = n.x;
    ny_[i] = n.y;
    nz_[i] = n.z;
  }

private:
  std::size_t index(int x, int y) const {
    assert(x >= 0 && x < width_ && y >= 0 && y < height_);
    return static_cast<std::size_t>(y) * width_ + x;
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> nx_, ny_, nz_;
};

/// One directional LED. `direction` points from the surface toward the light
/// in the sensor frame (+x right, +y up, +z out of the gel toward the
/// camera); it is normalized on construction. `color` is linear RGB in
/// [0, 255] and feeds both the diffuse and specular terms.
class LightSource {
public:
  LightSource() = default;
  /// Normalizes `direction`; throws std::invalid_argument on a zero vector,
  /// out-of-range color channels, or kd/ks outside [0, 1].
  LightSource(std::array<double, 3> color, Vec3 direction, double kd, double ks);

  const std::array<double, 3>& color() const noexcept { return color_; }
  Vec3 direction() const noexcept { return direction_; }
  double kd() const noexcept { return kd_; }
  double ks() const noexcept { return ks_; }

  friend bool operator==(const LightSource&, const LightSource&) = default;

private:
  std::array<double, 3> color_{255.0, 255.0, 255.0};
  Vec3 direction_{0.0, 0.0, 1.0};
  double kd_ = 0.5;
  double ks_ = 0.5;
};

/// Phong shading configuration. Defaults reproduce the reference sensor:
/// the four-LED set of default_lights(), mid-gray constant ambient,
/// k_a = 0.8, specular exponent 5, and a 50 um pixel pitch.
struct IlluminationConfig {
  std::vector<LightSource> lights;           ///< empty = ambient-only render
  std::array<double, 3> ambient{128.0, 128.0, 128.0};
  std::optional<TactileImage> background;    ///< per-pixel ambient, overrides `ambient`
  double k_a = 0.8;                          ///< ambient weight in [0, 1]
  double alpha = 5.0;                        ///< specular exponent > 0
  double pixel_to_meter = 5e-5;              ///< metric pixel pitch r, meters

  /// Config with the reference LED set installed.
  static IlluminationConfig reference();

  friend bool operator==(const IlluminationConfig&, const IlluminationConfig&) = default;
};

/// Throws std::invalid_argument unless k_a is in [0, 1], alpha > 0, and
/// pixel_to_meter > 0 (a background image is checked against the render size
/// at render time).
void require_valid(const IlluminationConfig& config);

/// The reference sensor's four LEDs: white from the top edge, blue from the
/// right, red from the bottom, green from the left, each inclined 0.25 in z.
std::vector<LightSource> default_lights();

/// Central-difference surface normals of an elevation field sampled at
/// `pixel_to_meter` meters per pixel: N = normalize(-dh/dx, -dh/dy, 1),
/// where x is the column axis and y the row axis (increasing downward).
/// Borders clamp to the edge sample. The +z orientation points at the
/// camera, so a flat field maps to (0, 0, 1) everywhere.
/// Throws std::invalid_argument on non-positive pixel_to_meter or an
/// invalid map.
NormalMap surface_normals(const HeightMap& height, double pixel_to_meter);

/// Phong illumination of a normal map with the viewer at +z:
///   I_c = k_a * ia_c + sum_m [ kd_m * max(L.N, 0)
///                              + ks_m * max(R.V, 0)^alpha ] * color_mc
/// with R = 2(L.N)N - L and V = (0,0,1). ia is the background pixel when a
/// background image is configured, the constant ambient triple otherwise.
/// Light directions live in the sensor frame, which is rotated 180 degrees
/// about the optical axis relative to image coordinates, so their x and y
/// components flip sign when dotted with image-frame normals. Channels are
/// clamped to [0, 255] and rounded to nearest.
/// Throws std::invalid_argument on a config/normal-map size mismatch.
TactileImage phong_render(const NormalMap& normals, const IlluminationConfig& config);

/// Full pipeline: threshold_depth -> deform_heightmap -> surface_normals ->
/// phong_render. Deterministic for fixed inputs.
TactileImage render_tactile(const DepthMap& depth, const DeformParams& deform,
                            const IlluminationConfig& illum);

/// Pixel-to-meter calibration from an object of known size:
/// r = object_side / pixel_span. Throws std::invalid_argument on a
/// non-positive span or side.
double calibrate_pixel_to_meter(double pixel_span, double object_side);

/// Width in pixels of the contact (elevation > 0) run in one row of e0:
/// last contact column - first contact column + 1, or 0 when the row has no
/// contact. Helper for span-based calibration.
int contact_span(const HeightMap& e0, int row);

}  // namespace tactsim
