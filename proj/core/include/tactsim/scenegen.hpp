#pragma once

#include <string>
#include <variant>
#include <vector>

#include "tactsim/image.hpp"
#include "tactsim/vec.hpp"

namespace tactsim {

/// Scene frame: x right and y down on the rendered image (so pose x/y line
/// up with pixel columns/rows), z along the camera axis away from the camera.
/// The camera sits at z = 0 looking toward +z; the membrane rest plane lies
/// at z = camera.distance. Every primitive is modeled apex-first: its local
/// origin is the point closest to the camera and its body extends toward
/// +z (into the membrane).

struct Sphere {
  double radius = 0.004;

  friend bool operator==(const Sphere&, const Sphere&) = default;
};

/// Axis-aligned full side lengths, top face toward the camera.
struct Box {
  double size_x = 0.005;
  double size_y = 0.005;
  double size_z = 0.005;

  friend bool operator==(const Box&, const Box&) = default;
};

/// Axis along z, flat top disc toward the camera.
struct Cylinder {
  double radius = 0.004;
  double height = 0.01;

  friend bool operator==(const Cylinder&, const Cylinder&) = default;
};

/// Apex toward the camera, circular base of `radius` at depth `height`.
struct Cone {
  double radius = 0.004;
  double height = 0.008;

  friend bool operator==(const Cone&, const Cone&) = default;
};

/// Ring axis along z; the closest ring of the tube touches local z = 0.
struct Torus {
  double major_radius = 0.005;
  double minor_radius = 0.0015;

  friend bool operator==(const Torus&, const Torus&) = default;
};

/// Doubly sinusoidal relief plate: surface depth below the apex
///   z(x, y) = amplitude * (0.5 - 0.5 * sin(2 pi x / wavelength_x)
///                                    * sin(2 pi y / wavelength_y)),
/// solid underneath, laterally clipped to extent_x by extent_y.
struct WaveField {
  double amplitude = 0.001;
  double wavelength_x = 0.008;
  double wavelength_y = 0.008;
  double extent_x = 0.03;
  double extent_y = 0.03;

  friend bool operator==(const WaveField&, const WaveField&) = default;
};

struct Primitive;

/// Boolean combination of child primitives (child poses are relative to the
/// composite's own frame). Subtract removes every later child from the first.
struct Composite {
  enum class Op { Union, Subtract };
  Op op = Op::Union;
  std::vector<Primitive> children;
};

using Shape = std::variant<Sphere, Box, Cylinder, Cone, Torus, WaveField, Composite>;

/// Pose of a primitive. position.x/.y are lateral offsets in meters from the
/// optical axis; position.z is extra press depth added to the scene-wide
/// press_depth (0 = apex exactly at first contact with the rest plane).
/// rotation_deg are XYZ Euler angles applied about the apex, Z*Y*X order.
struct Pose {
  Vec3 position{0.0, 0.0, 0.0};
  Vec3 rotation_deg{0.0, 0.0, 0.0};

  friend bool operator==(const Pose&, const Pose&) = default;
};

struct Primitive {
  Shape shape = Sphere{};
  Pose pose;
};

bool operator==(const Composite& a, const Composite& b);
bool operator==(const Primitive& a, const Primitive& b);

struct Camera {
  enum class Model { Orthographic, Pinhole };
  Model model = Model::Orthographic;
  int width = 640;
  int height = 480;
  double distance = 0.03;       ///< camera-to-membrane distance, meters
  double pixel_to_meter = 5e-5; ///< orthographic pixel footprint, meters
  double fov_deg = 60.0;        ///< pinhole horizontal field of view

  friend bool operator==(const Camera&, const Camera&) = default;
};

struct SceneSpec {
  Camera camera;
  std::vector<Primitive> primitives; ///< may be empty (all-far depth map)
  double press_depth = 0.0;          ///< scene-wide press past the rest plane

  friend bool operator==(const SceneSpec&, const SceneSpec&) = default;
};

/// Throws std::invalid_argument unless all dimensions are positive, the
/// camera raster is at least 3x3 with positive distance/pitch/fov, and
/// 0 <= press_depth (plus per-primitive extra press) < camera.distance.
void require_valid(const SceneSpec& scene);

/// Signed distance from a scene-frame point to the union of the scene's
/// primitives, in meters (exact for simple shapes, a conservative
/// underestimate for wave fields and subtractions). Exposed for tests.
double scene_distance(const SceneSpec& scene, Vec3 p);

/// Raycast depth of the scene: per pixel, the z coordinate (depth along the
/// camera axis, not ray length) of the nearest primitive hit, or the far
/// value camera.distance + 0.1 for misses. Deterministic; rows render in
/// parallel.
DepthMap render_depth(const SceneSpec& scene);

/// The far value render_depth writes for pixels that hit nothing.
double far_depth(const Camera& camera);

/// Centered nx x ny x nz pose grid: x/y spaced dx meters about 0, z = k * dz
/// for k = 0..nz-1 (z = 0 is first contact). Poses are ordered x-major, then
/// y, then z. Defaults produce the 99-pose probe grid. Throws
/// std::invalid_argument on non-positive counts or steps.
std::vector<Vec3> grid_poses(int nx = 3, int ny = 3, int nz = 11, double dx = 1e-3,
                             double dz = 1e-4);

/// Parse / serialize a SceneSpec from the documented JSON schema. parse
/// throws IoError naming the offending field on malformed or invalid input;
/// unknown keys are rejected. scene_to_json(parse_scene_json(s)) is stable.
SceneSpec parse_scene_json(const std::string& json_text);
std::string scene_to_json(const SceneSpec& scene);

}  // namespace tactsim
