#include "tactsim/scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "tactsim/error.hpp"
#include "tactsim/parallel.hpp"

namespace tactsim {

namespace {

using json = nlohmann::json;

constexpr double kHitEpsilon = 1e-9;  // meters; well under the 1e-6 oracle tolerance
constexpr int kMaxMarchSteps = 512;

// ------------------------------------------------------------ rotation -----

struct Mat3 {
  // row-major
  double m[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1};

  Vec3 transposed_apply(Vec3 v) const {  // R^T * v
    return {m[0] * v.x + m[3] * v.y + m[6] * v.z,
            m[1] * v.x + m[4] * v.y + m[7] * v.z,
            m[2] * v.x + m[5] * v.y + m[8] * v.z};
  }
  bool identity() const {
    return m[0] == 1 && m[1] == 0 && m[2] == 0 && m[3] == 0 && m[4] == 1 && m[5] == 0 &&
           m[6] == 0 && m[7] == 0 && m[8] == 1;
  }
};

Mat3 euler_zyx(Vec3 degrees) {
  const double d2r = std::numbers::pi / 180.0;
  const double cx = std::cos(degrees.x * d2r), sx = std::sin(degrees.x * d2r);
  const double cy = std::cos(degrees.y * d2r), sy = std::sin(degrees.y * d2r);
  const double cz = std::cos(degrees.z * d2r), sz = std::sin(degrees.z * d2r);
  Mat3 r;
  // R = Rz * Ry * Rx
  r.m[0] = cz * cy;
  r.m[1] = cz * sy * sx - sz * cx;
  r.m[2] = cz * sy * cx + sz * sx;
  r.m[3] = sz * cy;
  r.m[4] = sz * sy * sx + cz * cx;
  r.m[5] = sz * sy * cx - cz * sx;
  r.m[6] = -sy;
  r.m[7] = cy * sx;
  r.m[8] = cy * cx;
  return r;
}

// ------------------------------------------------------- local distances ---

double sd_sphere(Vec3 p, const Sphere& s) {
  const Vec3 c{0.0, 0.0, s.radius};
  return norm(p - c) - s.radius;
}

double sd_box(Vec3 p, const Box& b) {
  const double hx = b.size_x / 2.0, hy = b.size_y / 2.0, hz = b.size_z / 2.0;
  const double qx = std::abs(p.x) - hx;
  const double qy = std::abs(p.y) - hy;
  const double qz = std::abs(p.z - hz) - hz;
  const double ox = std::max(qx, 0.0), oy = std::max(qy, 0.0), oz = std::max(qz, 0.0);
  return std::sqrt(ox * ox + oy * oy + oz * oz) +
         std::min(std::max({qx, qy, qz}), 0.0);
}

double sd_cylinder(Vec3 p, const Cylinder& c) {
  const double drho = std::hypot(p.x, p.y) - c.radius;
  const double dz = std::abs(p.z - c.height / 2.0) - c.height / 2.0;
  const double orho = std::max(drho, 0.0), oz = std::max(dz, 0.0);
  return std::sqrt(orho * orho + oz * oz) + std::min(std::max(drho, dz), 0.0);
}

/// Exact signed distance of a 2-D polygon, negative inside.
double sd_polygon(const Vec2* v, int n, Vec2 p) {
  double d = dot(p - v[0], p - v[0]);
  double s = 1.0;
  for (int i = 0, j = n - 1; i < n; j = i, ++i) {
    const Vec2 e = v[j] - v[i];
    const Vec2 w = p - v[i];
    const double t = std::clamp(dot(w, e) / dot(e, e), 0.0, 1.0);
    const Vec2 b = w - Vec2{e.x * t, e.y * t};
    d = std::min(d, dot(b, b));
    const bool c0 = p.y >= v[i].y;
    const bool c1 = p.y < v[j].y;
    const bool c2 = e.x * w.y > e.y * w.x;
    if ((c0 && c1 && c2) || (!c0 && !c1 && !c2)) s = -s;
  }
  return s * std::sqrt(d);
}

double sd_cone(Vec3 p, const Cone& c) {
  // Revolved triangle profile in (rho, z): apex, rim, base center. The 2-D
  // profile distance equals the 3-D distance for axisymmetric solids.
  const Vec2 profile[3] = {{0.0, 0.0}, {c.radius, c.height}, {0.0, c.height}};
  return sd_polygon(profile, 3, {std::hypot(p.x, p.y), p.z});
}

double sd_torus(Vec3 p, const Torus& t) {
  const double qx = std::hypot(p.x, p.y) - t.major_radius;
  const double qz = p.z - t.minor_radius;
  return std::hypot(qx, qz) - t.minor_radius;
}

double wave_surface_depth(const WaveField& w, double x, double y) {
  const double two_pi = 2.0 * std::numbers::pi;
  return w.amplitude * (0.5 - 0.5 * std::sin(two_pi * x / w.wavelength_x) *
                                  std::sin(two_pi * y / w.wavelength_y));
}

double sd_wavefield(Vec3 p, const WaveField& w) {
  // Lipschitz-bounded heightfield distance: vertical gap scaled by the
  // maximum surface slope, intersected with the lateral extent slab. A
  // conservative underestimate, which sphere tracing tolerates.
  const double slope = w.amplitude * std::numbers::pi *
                       std::hypot(1.0 / w.wavelength_x, 1.0 / w.wavelength_y);
  const double lipschitz = std::sqrt(1.0 + slope * slope);
  const double vertical = (wave_surface_depth(w, p.x, p.y) - p.z) / lipschitz;
  const double lateral =
      std::max(std::abs(p.x) - w.extent_x / 2.0, std::abs(p.y) - w.extent_y / 2.0);
  return std::max(vertical, lateral);
}

double sd_primitive(Vec3 p, const Primitive& prim);

double sd_composite(Vec3 p, const Composite& c) {
  if (c.children.empty()) return std::numeric_limits<double>::infinity();
  if (c.op == Composite::Op::Union) {
    double d = std::numeric_limits<double>::infinity();
    for (const Primitive& child : c.children) d = std::min(d, sd_primitive(p, child));
    return d;
  }
  double d = sd_primitive(p, c.children.front());
  for (std::size_t i = 1; i < c.children.size(); ++i) {
    d = std::max(d, -sd_primitive(p, c.children[i]));
  }
  return d;
}

double sd_shape(Vec3 p, const Shape& shape) {
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) return sd_sphere(p, s);
        else if constexpr (std::is_same_v<T, Box>) return sd_box(p, s);
        else if constexpr (std::is_same_v<T, Cylinder>) return sd_cylinder(p, s);
        else if constexpr (std::is_same_v<T, Cone>) return sd_cone(p, s);
        else if constexpr (std::is_same_v<T, Torus>) return sd_torus(p, s);
        else if constexpr (std::is_same_v<T, WaveField>) return sd_wavefield(p, s);
        else return sd_composite(p, s);
      },
      shape);
}

double sd_primitive(Vec3 p, const Primitive& prim) {
  Vec3 local = p - prim.pose.position;
  if (prim.pose.rotation_deg != Vec3{0.0, 0.0, 0.0}) {
    local = euler_zyx(prim.pose.rotation_deg).transposed_apply(local);
  }
  return sd_shape(local, prim.shape);
}

// Top-level primitives carry press semantics: position.z presses deeper, so
// the apex sits at camera.distance - press_depth - position.z.
Primitive world_primitive(const Primitive& prim, const SceneSpec& scene) {
  Primitive world = prim;
  world.pose.position = {prim.pose.position.x, prim.pose.position.y,
                         scene.camera.distance - scene.press_depth -
                             prim.pose.position.z};
  return world;
}

// ------------------------------------------------------------ validation ---

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite, got " +
                                std::to_string(v));
  }
}

void check_shape(const Shape& shape) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          check_positive(s.radius, "sphere radius");
        } else if constexpr (std::is_same_v<T, Box>) {
          check_positive(s.size_x, "box size_x");
          check_positive(s.size_y, "box size_y");
          check_positive(s.size_z, "box size_z");
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          check_positive(s.radius, "cylinder radius");
          check_positive(s.height, "cylinder height");
        } else if constexpr (std::is_same_v<T, Cone>) {
          check_positive(s.radius, "cone radius");
          check_positive(s.height, "cone height");
        } else if constexpr (std::is_same_v<T, Torus>) {
          check_positive(s.major_radius, "torus major_radius");
          check_positive(s.minor_radius, "torus minor_radius");
        } else if constexpr (std::is_same_v<T, WaveField>) {
          check_positive(s.amplitude, "wave-field amplitude");
          check_positive(s.wavelength_x, "wave-field wavelength_x");
          check_positive(s.wavelength_y, "wave-field wavelength_y");
          check_positive(s.extent_x, "wave-field extent_x");
          check_positive(s.extent_y, "wave-field extent_y");
        } else {
          for (const Primitive& child : s.children) check_shape(child.shape);
        }
      },
      shape);
}

}  // namespace

void require_valid(const SceneSpec& scene) {
  const Camera& cam = scene.camera;
  if (cam.width < 3 || cam.height < 3) {
    throw std::invalid_argument("camera raster must be at least 3x3, got " +
                                std::to_string(cam.width) + "x" + std::to_string(cam.height));
  }
  check_positive(cam.distance, "camera distance");
  if (cam.model == Camera::Model::Orthographic) {
    check_positive(cam.pixel_to_meter, "camera pixel_to_meter");
  } else {
    if (!(cam.fov_deg > 0.0 && cam.fov_deg < 180.0)) {
      throw std::invalid_argument("pinhole fov_deg must lie in (0, 180), got " +
                                  std::to_string(cam.fov_deg));
    }
  }
  if (!(scene.press_depth >= 0.0) || !std::isfinite(scene.press_depth)) {
    throw std::invalid_argument("press_depth must be >= 0, got " +
                                std::to_string(scene.press_depth));
  }
  for (const Primitive& prim : scene.primitives) {
    check_shape(prim.shape);
    const double press = scene.press_depth + prim.pose.position.z;
    if (!(press >= 0.0) || !(press < cam.distance)) {
      throw std::invalid_argument(
          "total press depth " + std::to_string(press) +
          " must lie in [0, camera distance) — the membrane budget");
    }
  }
}

double scene_distance(const SceneSpec& scene, Vec3 p) {
  double d = std::numeric_limits<double>::infinity();
  for (const Primitive& prim : scene.primitives) {
    d = std::min(d, sd_primitive(p, world_primitive(prim, scene)));
  }
  return d;
}

double far_depth(const Camera& camera) { return camera.distance + 0.1; }

DepthMap render_depth(const SceneSpec& scene) {
  require_valid(scene);
  const Camera& cam = scene.camera;
  const double far = far_depth(cam);

  // Flatten top-level transforms once.
  std::vector<Primitive> world;
  world.reserve(scene.primitives.size());
  for (const Primitive& prim : scene.primitives) {
    world.push_back(world_primitive(prim, scene));
  }
  const auto distance_at = [&world](Vec3 p) {
    double d = std::numeric_limits<double>::infinity();
    for (const Primitive& prim : world) d = std::min(d, sd_primitive(p, prim));
    return d;
  };

  const double cx = (cam.width - 1) / 2.0;
  const double cy = (cam.height - 1) / 2.0;
  const bool ortho = cam.model == Camera::Model::Orthographic;
  const double tan_half =
      std::tan(cam.fov_deg * std::numbers::pi / 360.0);  // pinhole half-FOV

  DepthMap depth(cam.width, cam.height);
  parallel_for_rows(0, cam.height, [&](int y) {
    double* row = depth.row(y);
    for (int x = 0; x < cam.width; ++x) {
      Vec3 origin{0.0, 0.0, 0.0};
      Vec3 dir{0.0, 0.0, 1.0};
      if (ortho) {
        origin = {(x - cx) * cam.pixel_to_meter, (y - cy) * cam.pixel_to_meter, 0.0};
      } else {
        const double u = (x - cx) * (2.0 * tan_half / cam.width);
        const double v = (y - cy) * (2.0 * tan_half / cam.width);
        const double inv_len = 1.0 / std::sqrt(u * u + v * v + 1.0);
        dir = {u * inv_len, v * inv_len, inv_len};
      }
      const double t_max = far / dir.z;
      double t = 0.0;
      double hit = far;
      for (int step = 0; step < kMaxMarchSteps && t <= t_max; ++step) {
        const Vec3 p = origin + t * dir;
        const double d = distance_at(p);
        if (d < kHitEpsilon) {
          hit = p.z;
          break;
        }
        t += d;
      }
      row[x] = hit;
    }
  });
  return depth;
}

std::vector<Vec3> grid_poses(int nx, int ny, int nz, double dx, double dz) {
  if (nx <= 0 || ny <= 0 || nz <= 0) {
    throw std::invalid_argument("grid step counts must be positive");
  }
  check_positive(dx, "grid dx");
  check_positive(dz, "grid dz");
  std::vector<Vec3> poses;
  poses.reserve(static_cast<std::size_t>(nx) * ny * nz);
  for (int ix = 0; ix < nx; ++ix) {
    for (int iy = 0; iy < ny; ++iy) {
      for (int iz = 0; iz < nz; ++iz) {
        poses.push_back({(ix - (nx - 1) / 2.0) * dx, (iy - (ny - 1) / 2.0) * dx,
                         iz * dz});
      }
    }
  }
  return poses;
}

// ------------------------------------------------------------------ JSON ---

bool operator==(const Composite& a, const Composite& b) {
  return a.op == b.op && a.children == b.children;
}

bool operator==(const Primitive& a, const Primitive& b) {
  return a.shape == b.shape && a.pose == b.pose;
}

namespace {

[[noreturn]] void fail_field(const std::string& where, const std::string& why) {
  throw IoError("invalid scene JSON at " + where + ": " + why);
}

void check_keys(const json& obj, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find_if(allowed.begin(), allowed.end(),
                     [&key](const char* a) { return key == a; }) == allowed.end()) {
      fail_field(where, "unknown key '" + key + "'");
    }
  }
}

double get_number(const json& obj, const std::string& where, const char* key,
                  double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) fail_field(where + "." + key, "expected a number");
  return obj[key].get<double>();
}

Vec3 get_vec3(const json& obj, const std::string& where, const char* key, Vec3 fallback) {
  if (!obj.contains(key)) return fallback;
  const json& arr = obj[key];
  if (!arr.is_array() || arr.size() != 3 || !arr[0].is_number() || !arr[1].is_number() ||
      !arr[2].is_number()) {
    fail_field(where + "." + key, "expected an array of 3 numbers");
  }
  return {arr[0].get<double>(), arr[1].get<double>(), arr[2].get<double>()};
}

Primitive parse_primitive(const json& obj, const std::string& where);

Shape parse_shape(const json& obj, const std::string& where, const std::string& kind) {
  if (kind == "sphere") {
    check_keys(obj, where, {"shape", "radius", "position", "rotation_deg"});
    Sphere s;
    s.radius = get_number(obj, where, "radius", s.radius);
    return s;
  }
  if (kind == "box") {
    check_keys(obj, where, {"shape", "size", "position", "rotation_deg"});
    Box b;
    const Vec3 size = get_vec3(obj, where, "size", {b.size_x, b.size_y, b.size_z});
    b.size_x = size.x;
    b.size_y = size.y;
    b.size_z = size.z;
    return b;
  }
  if (kind == "cylinder" || kind == "cone") {
    check_keys(obj, where, {"shape", "radius", "height", "position", "rotation_deg"});
    if (kind == "cylinder") {
      Cylinder c;
      c.radius = get_number(obj, where, "radius", c.radius);
      c.height = get_number(obj, where, "height", c.height);
      return c;
    }
    Cone c;
    c.radius = get_number(obj, where, "radius", c.radius);
    c.height = get_number(obj, where, "height", c.height);
    return c;
  }
  if (kind == "torus") {
    check_keys(obj, where, {"shape", "major_radius", "minor_radius", "position", "rotation_deg"});
    Torus t;
    t.major_radius = get_number(obj, where, "major_radius", t.major_radius);
    t.minor_radius = get_number(obj, where, "minor_radius", t.minor_radius);
    return t;
  }
  if (kind == "wave-field") {
    check_keys(obj, where, {"shape", "amplitude", "wavelength", "extent", "position", "rotation_deg"});
    WaveField w;
    w.amplitude = get_number(obj, where, "amplitude", w.amplitude);
    if (obj.contains("wavelength")) {
      const json& arr = obj["wavelength"];
      if (!arr.is_array() || arr.size() != 2) {
        fail_field(where + ".wavelength", "expected an array of 2 numbers");
      }
      w.wavelength_x = arr[0].get<double>();
      w.wavelength_y = arr[1].get<double>();
    }
    if (obj.contains("extent")) {
      const json& arr = obj["extent"];
      if (!arr.is_array() || arr.size() != 2) {
        fail_field(where + ".extent", "expected an array of 2 numbers");
      }
      w.extent_x = arr[0].get<double>();
      w.extent_y = arr[1].get<double>();
    }
    return w;
  }
  if (kind == "composite") {
    check_keys(obj, where, {"shape", "op", "children", "position", "rotation_deg"});
    Composite c;
    const std::string op = obj.value("op", "union");
    if (op == "union") {
      c.op = Composite::Op::Union;
    } else if (op == "subtract") {
      c.op = Composite::Op::Subtract;
    } else {
      fail_field(where + ".op", "expected 'union' or 'subtract', got '" + op + "'");
    }
    if (!obj.contains("children") || !obj["children"].is_array() || obj["children"].empty()) {
      fail_field(where + ".children", "expected a non-empty array of primitives");
    }
    int i = 0;
    for (const json& child : obj["children"]) {
      c.children.push_back(
          parse_primitive(child, where + ".children[" + std::to_string(i++) + "]"));
    }
    return c;
  }
  fail_field(where + ".shape", "unknown shape '" + kind + "'");
}

Primitive parse_primitive(const json& obj, const std::string& where) {
  if (!obj.is_object()) fail_field(where, "expected an object");
  if (!obj.contains("shape") || !obj["shape"].is_string()) {
    fail_field(where + ".shape", "expected a shape name string");
  }
  Primitive prim;
  prim.shape = parse_shape(obj, where, obj["shape"].get<std::string>());
  prim.pose.position = get_vec3(obj, where, "position", {0.0, 0.0, 0.0});
  prim.pose.rotation_deg = get_vec3(obj, where, "rotation_deg", {0.0, 0.0, 0.0});
  return prim;
}

json shape_to_json(const Shape& shape) {
  json obj;
  std::visit(
      [&obj](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Sphere>) {
          obj["shape"] = "sphere";
          obj["radius"] = s.radius;
        } else if constexpr (std::is_same_v<T, Box>) {
          obj["shape"] = "box";
          obj["size"] = {s.size_x, s.size_y, s.size_z};
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          obj["shape"] = "cylinder";
          obj["radius"] = s.radius;
          obj["height"] = s.height;
        } else if constexpr (std::is_same_v<T, Cone>) {
          obj["shape"] = "cone";
          obj["radius"] = s.radius;
          obj["height"] = s.height;
        } else if constexpr (std::is_same_v<T, Torus>) {
          obj["shape"] = "torus";
          obj["major_radius"] = s.major_radius;
          obj["minor_radius"] = s.minor_radius;
        } else if constexpr (std::is_same_v<T, WaveField>) {
          obj["shape"] = "wave-field";
          obj["amplitude"] = s.amplitude;
          obj["wavelength"] = {s.wavelength_x, s.wavelength_y};
          obj["extent"] = {s.extent_x, s.extent_y};
        } else {
          obj["shape"] = "composite";
          obj["op"] = s.op == Composite::Op::Union ? "union" : "subtract";
          json children = json::array();
          for (const Primitive& child : s.children) {
            json c = shape_to_json(child.shape);
            c["position"] = {child.pose.position.x, child.pose.position.y,
                             child.pose.position.z};
            c["rotation_deg"] = {child.pose.rotation_deg.x, child.pose.rotation_deg.y,
                                 child.pose.rotation_deg.z};
            children.push_back(std::move(c));
          }
          obj["children"] = std::move(children);
        }
      },
      shape);
  return obj;
}

}  // namespace

SceneSpec parse_scene_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("invalid scene JSON: ") + e.what());
  }
  if (!doc.is_object()) throw IoError("invalid scene JSON: top level must be an object");
  check_keys(doc, "scene", {"camera", "press_depth", "primitives"});

  SceneSpec scene;
  if (doc.contains("camera")) {
    const json& cam = doc["camera"];
    if (!cam.is_object()) fail_field("scene.camera", "expected an object");
    check_keys(cam, "scene.camera",
               {"model", "width", "height", "distance", "pixel_to_meter", "fov_deg"});
    const std::string model = cam.value("model", "orthographic");
    if (model == "orthographic") {
      scene.camera.model = Camera::Model::Orthographic;
    } else if (model == "pinhole") {
      scene.camera.model = Camera::Model::Pinhole;
    } else {
      fail_field("scene.camera.model", "expected 'orthographic' or 'pinhole'");
    }
    if (cam.contains("width")) {
      if (!cam["width"].is_number_integer()) fail_field("scene.camera.width", "expected an integer");
      scene.camera.width = cam["width"].get<int>();
    }
    if (cam.contains("height")) {
      if (!cam["height"].is_number_integer()) fail_field("scene.camera.height", "expected an integer");
      scene.camera.height = cam["height"].get<int>();
    }
    scene.camera.distance = get_number(cam, "scene.camera", "distance", scene.camera.distance);
    scene.camera.pixel_to_meter =
        get_number(cam, "scene.camera", "pixel_to_meter", scene.camera.pixel_to_meter);
    scene.camera.fov_deg = get_number(cam, "scene.camera", "fov_deg", scene.camera.fov_deg);
  }
  scene.press_depth = get_number(doc, "scene", "press_depth", 0.0);
  if (doc.contains("primitives")) {
    if (!doc["primitives"].is_array()) fail_field("scene.primitives", "expected an array");
    int i = 0;
    for (const json& prim : doc["primitives"]) {
      scene.primitives.push_back(
          parse_primitive(prim, "scene.primitives[" + std::to_string(i++) + "]"));
    }
  }
  try {
    require_valid(scene);
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("invalid scene JSON: ") + e.what());
  }
  return scene;
}

std::string scene_to_json(const SceneSpec& scene) {
  json doc;
  doc["camera"] = {
      {"model",
       scene.camera.model == Camera::Model::Orthographic ? "orthographic" : "pinhole"},
      {"width", scene.camera.width},
      {"height", scene.camera.height},
      {"distance", scene.camera.distance},
      {"pixel_to_meter", scene.camera.pixel_to_meter},
      {"fov_deg", scene.camera.fov_deg},
  };
  doc["press_depth"] = scene.press_depth;
  json prims = json::array();
  for (const Primitive& prim : scene.primitives) {
    json p = shape_to_json(prim.shape);
    p["position"] = {prim.pose.position.x, prim.pose.position.y, prim.pose.position.z};
    p["rotation_deg"] = {prim.pose.rotation_deg.x, prim.pose.rotation_deg.y,
                         prim.pose.rotation_deg.z};
    prims.push_back(std::move(p));
  }
  doc["primitives"] = std::move(prims);
  return doc.dump(2);
}

}  // namespace tactsim
