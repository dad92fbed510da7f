#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fetch.hpp"
#include "tactsim/augment.hpp"
#include "tactsim/config.hpp"
#include "tactsim/elastomer.hpp"
#include "tactsim/error.hpp"
#include "tactsim/evaluate.hpp"
#include "tactsim/illumination.hpp"
#include "tactsim/image_io.hpp"
#include "tactsim/scenegen.hpp"

namespace tactsim::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return buf.str();
}

/// Adds the failing stage to an error without changing its category (and
/// thereby its exit code).
template <typename Fn>
auto stage(const std::string& what, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const IoError& e) {
    throw IoError(what + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(what + ": " + e.what());
  }
}

struct LoadedConfig {
  PipelineConfig config;
  std::string dir;  ///< directory of the config file, "" for the default
};

LoadedConfig load_config(const std::string& path, bool lenient) {
  if (path.empty()) return {default_config(), ""};
  return stage("loading config '" + path + "'", [&] {
    std::vector<std::string> warnings;
    LoadedConfig loaded;
    loaded.config = parse_config_json(read_text_file(path), !lenient, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
    loaded.dir = fs::path(path).parent_path().string();
    return loaded;
  });
}

std::string resolve_against(const std::string& base_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
  return p.string();
}

/// Materializes background_path into the illumination config.
void load_background(LoadedConfig& loaded) {
  if (loaded.config.background_path.empty()) return;
  const std::string path = resolve_against(loaded.dir, loaded.config.background_path);
  loaded.config.illumination.background =
      stage("loading background '" + path + "'", [&] { return read_rgb(path); });
}

void apply_variant_flag(PipelineConfig& config, const std::string& variant) {
  if (variant.empty()) return;
  if (variant == "single") {
    config.deform.variant = DeformVariant::SingleGaussian;
  } else if (variant == "dog") {
    config.deform.variant = DeformVariant::DifferenceOfGaussians;
  } else if (variant == "raw") {
    config.deform.variant = DeformVariant::BeforeSmoothing;
  } else {
    throw std::invalid_argument("unknown variant '" + variant + "' (expected single|dog|raw)");
  }
}

/// Sorted depth-map files (.pfm / .png) directly under dir.
std::vector<fs::path> list_depth_files(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    if (ext == ".pfm" || ext == ".png") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
}

AlignMode mode_from_flag(const std::string& s) {
  if (s == "none") return AlignMode::None;
  if (s == "global") return AlignMode::Global;
  if (s == "per-object") return AlignMode::PerObject;
  throw std::invalid_argument("unknown alignment mode '" + s +
                              "' (expected none|global|per-object)");
}

std::map<std::string, AlignmentPoints> load_annotations(const std::string& path) {
  return stage("loading annotations '" + path + "'",
               [&] { return parse_alignment_json(read_text_file(path)); });
}

json metrics_json(const MetricReport& m) {
  json j;
  j["ssim"] = m.ssim;
  if (std::isinf(m.psnr)) {
    j["psnr"] = nullptr;
    j["psnr_infinite"] = true;
  } else {
    j["psnr"] = m.psnr;
  }
  j["mae_percent"] = m.mae_percent;
  return j;
}

void print_metrics(const MetricReport& m, bool as_json) {
  if (as_json) {
    std::cout << metrics_json(m).dump(2) << "\n";
    return;
  }
  std::cout << "ssim " << m.ssim << "\n";
  std::cout << "psnr " << (std::isinf(m.psnr) ? std::string("inf") : std::to_string(m.psnr))
            << "\n";
  std::cout << "mae " << m.mae_percent << "%\n";
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out.good()) throw IoError("short write on '" + path + "'");
}

// ---------------------------------------------------------------- render --

struct RenderOpts {
  std::string depth, config, out, variant;
  bool lenient = false;
};

int run_render(const RenderOpts& o) {
  LoadedConfig loaded = load_config(o.config, o.lenient);
  apply_variant_flag(loaded.config, o.variant);
  load_background(loaded);
  const DepthMap depth =
      stage("reading depth '" + o.depth + "'", [&] { return read_depth(o.depth); });
  const TactileImage image = stage("rendering", [&] {
    return render_tactile(depth, loaded.config.deform, loaded.config.illumination);
  });
  stage("writing '" + o.out + "'", [&] { write_rgb(o.out, image); });
  return 0;
}

// ----------------------------------------------------------------- batch --

struct BatchOpts {
  std::string depth_dir, out_dir, config, variant;
  bool lenient = false;
};

int run_batch(const BatchOpts& o) {
  LoadedConfig loaded = load_config(o.config, o.lenient);
  apply_variant_flag(loaded.config, o.variant);
  load_background(loaded);
  const std::vector<fs::path> files = list_depth_files(o.depth_dir);
  if (files.empty()) throw IoError("no depth maps (.pfm/.png) under " + o.depth_dir);
  ensure_out_dir(o.out_dir);

  int failures = 0;
  int worst = 0;
  for (const fs::path& file : files) {
    const fs::path out = fs::path(o.out_dir) / file.stem().concat(".png");
    try {
      const DepthMap depth = read_depth(file.string());
      const TactileImage image =
          render_tactile(depth, loaded.config.deform, loaded.config.illumination);
      write_rgb(out.string(), image);
    } catch (const IoError& e) {
      std::cerr << "error: " << file.filename().string() << ": " << e.what() << "\n";
      ++failures;
      worst = 2;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << file.filename().string() << ": " << e.what() << "\n";
      ++failures;
      worst = std::max(worst, 1);
    }
  }
  if (failures > 0) {
    std::cerr << failures << " of " << files.size() << " depth maps failed\n";
    return worst;
  }
  return 0;
}

// -------------------------------------------------------------- gen-depth --

struct GenDepthOpts {
  std::string scene, config, out, out_dir;
  bool grid = false;
  bool lenient = false;
  int nx = 3, ny = 3, nz = 11;
  double dx = 1e-3, dz = 1e-4;
};

SceneSpec load_scene(const GenDepthOpts& o) {
  if (!o.scene.empty() && !o.config.empty()) {
    throw std::invalid_argument("pass either --scene or --config, not both");
  }
  if (!o.scene.empty()) {
    return stage("loading scene '" + o.scene + "'",
                 [&] { return parse_scene_json(read_text_file(o.scene)); });
  }
  return load_config(o.config, o.lenient).config.scene;
}

SceneSpec offset_scene(const SceneSpec& base, Vec3 offset) {
  SceneSpec scene = base;
  for (Primitive& primitive : scene.primitives) {
    primitive.pose.position = primitive.pose.position + offset;
  }
  return scene;
}

int run_gen_depth(const GenDepthOpts& o) {
  const SceneSpec scene = load_scene(o);
  if (!o.grid) {
    if (o.out.empty()) throw std::invalid_argument("--out is required without --grid");
    const DepthMap depth = stage("raycasting", [&] { return render_depth(scene); });
    stage("writing '" + o.out + "'", [&] { write_depth(o.out, depth); });
    return 0;
  }

  if (o.out_dir.empty()) throw std::invalid_argument("--out-dir is required with --grid");
  ensure_out_dir(o.out_dir);
  const std::vector<Vec3> poses = grid_poses(o.nx, o.ny, o.nz, o.dx, o.dz);
  for (const Vec3& pose : poses) {
    // File names use grid indices: lateral steps of dx, press steps of dz.
    const long ix = std::lround(pose.x / o.dx);
    const long iy = std::lround(pose.y / o.dx);
    const long iz = std::lround(pose.z / o.dz);
    const std::string name =
        "pos_" + std::to_string(ix) + "_" + std::to_string(iy) + "_" + std::to_string(iz) +
        ".pfm";
    const DepthMap depth = stage("raycasting " + name, [&] {
      return render_depth(offset_scene(scene, pose));
    });
    const std::string out = (fs::path(o.out_dir) / name).string();
    stage("writing '" + out + "'", [&] { write_depth(out, depth); });
  }
  return 0;
}

// ---------------------------------------------------------------- augment --

struct AugmentOpts {
  std::string depth_dir, out_dir, config;
  int count = 1;
  std::optional<std::uint64_t> seed;
  bool lenient = false;
};

int run_augment(const AugmentOpts& o) {
  LoadedConfig loaded = load_config(o.config, o.lenient);
  load_background(loaded);
  if (o.count < 1) throw std::invalid_argument("--count must be >= 1");
  AugmentSettings settings = loaded.config.augment;
  if (o.seed.has_value()) settings.seed = *o.seed;
  const AugmentSpec spec = stage("loading textures", [&] {
    return load_augment(settings, loaded.dir);
  });

  const std::vector<fs::path> files = list_depth_files(o.depth_dir);
  if (files.empty()) throw IoError("no depth maps (.pfm/.png) under " + o.depth_dir);
  ensure_out_dir(o.out_dir);

  // Same draw indexing as augment_batch: input-major, i * count + j.
  for (std::size_t i = 0; i < files.size(); ++i) {
    const DepthMap depth = stage("reading '" + files[i].string() + "'",
                                 [&] { return read_depth(files[i].string()); });
    for (int j = 0; j < o.count; ++j) {
      const std::uint64_t draw = i * static_cast<std::uint64_t>(o.count) + j;
      const DepthMap perturbed = perturb_depth(depth, spec, draw);
      const TactileImage image =
          render_tactile(perturbed, loaded.config.deform, loaded.config.illumination);
      const std::string name =
          files[i].stem().string() + "_aug_" + std::to_string(j) + ".png";
      const std::string out = (fs::path(o.out_dir) / name).string();
      stage("writing '" + out + "'", [&] { write_rgb(out, image); });
    }
  }
  return 0;
}

// ------------------------------------------------------- compare / report --

struct CompareOpts {
  std::string real, gen, align = "none", annotations, out;
  bool json_output = false;
};

int report_dirs(const CompareOpts& o) {
  const AlignMode mode = mode_from_flag(o.align);
  std::map<std::string, AlignmentPoints> annotations;
  if (mode != AlignMode::None) {
    if (o.annotations.empty()) {
      throw std::invalid_argument("--annotations is required for --align " + o.align);
    }
    annotations = load_annotations(o.annotations);
  }
  const DatasetReport report = dataset_report(o.real, o.gen, mode, annotations);
  write_output(o.out, o.json_output ? report_to_json(report) : report_to_text(report));
  return 0;
}

int run_compare(const CompareOpts& o) {
  std::error_code ec;
  const bool real_dir = fs::is_directory(o.real, ec);
  const bool gen_dir = fs::is_directory(o.gen, ec);
  if (real_dir != gen_dir) {
    throw std::invalid_argument("--real and --gen must both be files or both directories");
  }
  if (real_dir) return report_dirs(o);

  const TactileImage real =
      stage("reading '" + o.real + "'", [&] { return read_rgb(o.real); });
  const TactileImage gen = stage("reading '" + o.gen + "'", [&] { return read_rgb(o.gen); });
  const AlignMode mode = mode_from_flag(o.align);
  MetricReport metrics;
  if (mode == AlignMode::None) {
    metrics = compare(real, gen);
  } else {
    if (o.annotations.empty()) {
      throw std::invalid_argument("--annotations is required for --align " + o.align);
    }
    const std::map<std::string, AlignmentPoints> annotations = load_annotations(o.annotations);
    std::string key;
    if (mode == AlignMode::Global) {
      key = "global";
    } else {
      // Per-object on a single pair: longest annotation key prefixing the file name.
      const std::string name = fs::path(o.real).filename().string();
      std::size_t best = 0;
      for (const auto& [k, v] : annotations) {
        (void)v;
        if (k.size() >= best && name.rfind(k, 0) == 0) {
          key = k;
          best = k.size();
        }
      }
      if (key.empty()) throw IoError("no alignment annotation matches '" + name + "'");
    }
    const auto it = annotations.find(key);
    if (it == annotations.end()) {
      throw IoError("annotations have no '" + key + "' entry");
    }
    const AlignmentTransform t = constrained_affine(it->second.p1_src, it->second.p2_src,
                                                    it->second.p1_dst, it->second.p2_dst);
    const auto [warped, cropped] = warp_and_crop(real, gen, t);
    metrics = compare(warped, cropped);
  }
  if (!o.out.empty()) {
    json j = metrics_json(metrics);
    write_output(o.out, j.dump(2) + "\n");
  } else {
    print_metrics(metrics, o.json_output);
  }
  return 0;
}

// ------------------------------------------------------------------ align --

struct AlignOpts {
  std::string real, gen, annotations, key = "global", out_real, out_gen;
  bool suggest = false;
  bool json_output = false;
};

int run_align(const AlignOpts& o) {
  const TactileImage real =
      stage("reading '" + o.real + "'", [&] { return read_rgb(o.real); });
  const TactileImage gen = stage("reading '" + o.gen + "'", [&] { return read_rgb(o.gen); });

  if (o.suggest) {
    const Vec2 rc = contact_centroid(real);
    const Vec2 gc = contact_centroid(gen);
    if (o.json_output) {
      json j;
      j["real_centroid"] = {rc.x, rc.y};
      j["gen_centroid"] = {gc.x, gc.y};
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "real contact centroid: " << rc.x << " " << rc.y << "\n";
      std::cout << "gen contact centroid:  " << gc.x << " " << gc.y << "\n";
    }
    return 0;
  }

  if (o.annotations.empty()) {
    throw std::invalid_argument("--annotations is required (or pass --suggest)");
  }
  const std::map<std::string, AlignmentPoints> annotations = load_annotations(o.annotations);
  const auto it = annotations.find(o.key);
  if (it == annotations.end()) throw IoError("annotations have no '" + o.key + "' entry");
  const AlignmentTransform t = constrained_affine(it->second.p1_src, it->second.p2_src,
                                                  it->second.p1_dst, it->second.p2_dst);
  const auto [warped, cropped] = warp_and_crop(real, gen, t);
  if (!o.out_real.empty()) {
    stage("writing '" + o.out_real + "'", [&] { write_rgb(o.out_real, warped); });
  }
  if (!o.out_gen.empty()) {
    stage("writing '" + o.out_gen + "'", [&] { write_rgb(o.out_gen, cropped); });
  }

  if (o.json_output) {
    json j;
    j["scale"] = t.scale();
    j["translation"] = {t.translation().x, t.translation().y};
    j["coefficients"] = t.coefficients();
    j["cropped_width"] = warped.width();
    j["cropped_height"] = warped.height();
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "scale " << t.scale() << "\n";
    std::cout << "translation " << t.translation().x << " " << t.translation().y << "\n";
    std::cout << "cropped size " << warped.width() << "x" << warped.height() << "\n";
  }
  return 0;
}

// -------------------------------------------------------------- calibrate --

struct CalibrateOpts {
  double object_side = 0.0;
  std::optional<double> pixel_span;
  std::string depth;
  double d_max = 0.03;
  bool json_output = false;
};

int run_calibrate(const CalibrateOpts& o) {
  double span = 0.0;
  if (o.pixel_span.has_value()) {
    if (!o.depth.empty()) {
      throw std::invalid_argument("pass either --pixel-span or --depth, not both");
    }
    span = *o.pixel_span;
  } else {
    if (o.depth.empty()) throw std::invalid_argument("pass --pixel-span or --depth");
    const DepthMap depth =
        stage("reading depth '" + o.depth + "'", [&] { return read_depth(o.depth); });
    const HeightMap e0 = threshold_depth(depth, o.d_max);
    int widest = 0;
    for (int row = 0; row < e0.height(); ++row) {
      widest = std::max(widest, contact_span(e0, row));
    }
    if (widest == 0) throw std::invalid_argument("no contact found in '" + o.depth + "'");
    span = widest;
  }
  const double r = calibrate_pixel_to_meter(span, o.object_side);
  if (o.json_output) {
    json j;
    j["pixel_span"] = span;
    j["object_side"] = o.object_side;
    j["pixel_to_meter"] = r;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "pixel span " << span << "\n";
    std::cout << "pixel_to_meter " << r << "\n";
  }
  return 0;
}

// ----------------------------------------------------------------- config --

struct ConfigOpts {
  std::string file;
  bool dump = false;
  bool lenient = false;
};

int run_config(const ConfigOpts& o) {
  const LoadedConfig loaded = load_config(o.file, o.lenient);
  if (o.dump || o.file.empty()) {
    std::cout << config_to_json(loaded.config);
  } else {
    std::cout << "ok\n";
  }
  return 0;
}

// ---------------------------------------------------------- fetch-dataset --

struct FetchOpts {
  std::string manifest, out_dir, base_url;
  bool no_unpack = false;
};

int run_fetch(const FetchOpts& o) {
  const FetchManifest manifest = stage("loading manifest '" + o.manifest + "'", [&] {
    return parse_fetch_manifest(read_text_file(o.manifest));
  });
  if (!manifest.homepage.empty()) {
    std::cerr << "dataset homepage: " << manifest.homepage << "\n";
  }
  FetchOptions options;
  options.out_dir = o.out_dir;
  options.base_url_override = o.base_url;
  options.allow_unpack = !o.no_unpack;
  fetch_dataset(manifest, options);
  return 0;
}

// ------------------------------------------------------------------ shell --

int guarded(const std::function<int()>& action) {
  try {
    return action();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

void add_config_flags(CLI::App* cmd, std::string* config, bool* lenient) {
  cmd->add_option("--config", *config, "pipeline config JSON (defaults to the embedded baseline)");
  cmd->add_flag("--lenient", *lenient, "downgrade unknown config keys to warnings");
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"tactsim: simulated optical tactile sensor toolchain"};
  app.set_version_flag("--version", "tactsim 1.0.0");
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads, "worker threads (overrides TACTSIM_THREADS)");

  std::function<int()> action;

  auto render_opts = std::make_shared<RenderOpts>();
  {
    CLI::App* cmd = app.add_subcommand("render", "render one depth map to a tactile image");
    cmd->add_option("--depth", render_opts->depth, "input depth map (.pfm or 16-bit .png)")
        ->required();
    cmd->add_option("--out", render_opts->out, "output PNG path")->required();
    cmd->add_option("--variant", render_opts->variant,
                    "membrane variant override: single|dog|raw");
    add_config_flags(cmd, &render_opts->config, &render_opts->lenient);
    cmd->callback([&action, render_opts] { action = [render_opts] { return run_render(*render_opts); }; });
  }

  auto batch_opts = std::make_shared<BatchOpts>();
  {
    CLI::App* cmd = app.add_subcommand("batch", "render every depth map in a directory");
    cmd->add_option("--depth-dir", batch_opts->depth_dir, "directory of depth maps")->required();
    cmd->add_option("--out-dir", batch_opts->out_dir, "output directory")->required();
    cmd->add_option("--variant", batch_opts->variant, "membrane variant override: single|dog|raw");
    add_config_flags(cmd, &batch_opts->config, &batch_opts->lenient);
    cmd->callback([&action, batch_opts] { action = [batch_opts] { return run_batch(*batch_opts); }; });
  }

  auto gen_opts = std::make_shared<GenDepthOpts>();
  {
    CLI::App* cmd = app.add_subcommand("gen-depth", "raycast depth maps from a primitive scene");
    cmd->add_option("--scene", gen_opts->scene, "scene JSON file");
    cmd->add_option("--out", gen_opts->out, "output depth map (single render)");
    cmd->add_option("--out-dir", gen_opts->out_dir, "output directory (--grid)");
    cmd->add_flag("--grid", gen_opts->grid, "render the probe grid of poses");
    cmd->add_option("--grid-nx", gen_opts->nx, "grid count along x")->capture_default_str();
    cmd->add_option("--grid-ny", gen_opts->ny, "grid count along y")->capture_default_str();
    cmd->add_option("--grid-nz", gen_opts->nz, "grid count along z (press)")->capture_default_str();
    cmd->add_option("--grid-dx", gen_opts->dx, "lateral step, meters")->capture_default_str();
    cmd->add_option("--grid-dz", gen_opts->dz, "press step, meters")->capture_default_str();
    add_config_flags(cmd, &gen_opts->config, &gen_opts->lenient);
    cmd->callback([&action, gen_opts] { action = [gen_opts] { return run_gen_depth(*gen_opts); }; });
  }

  auto augment_opts = std::make_shared<AugmentOpts>();
  {
    CLI::App* cmd =
        app.add_subcommand("augment", "render seeded texture-perturbed variants of depth maps");
    cmd->add_option("--depth-dir", augment_opts->depth_dir, "directory of depth maps")->required();
    cmd->add_option("--out-dir", augment_opts->out_dir, "output directory")->required();
    cmd->add_option("--count", augment_opts->count, "renders per input")->capture_default_str();
    std::uint64_t seed_value = 0;
    auto* seed_opt = cmd->add_option("--seed", seed_value, "seed override");
    add_config_flags(cmd, &augment_opts->config, &augment_opts->lenient);
    cmd->callback([&action, augment_opts, seed_opt, seed_value]() mutable {
      if (seed_opt->count() > 0) augment_opts->seed = seed_value;
      action = [augment_opts] { return run_augment(*augment_opts); };
    });
  }

  auto compare_opts = std::make_shared<CompareOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "compare", "SSIM/PSNR/MAE of an image pair (files) or paired directories");
    cmd->add_option("--real", compare_opts->real, "real image or directory")->required();
    cmd->add_option("--gen", compare_opts->gen, "generated image or directory")->required();
    cmd->add_option("--align", compare_opts->align, "alignment: none|global|per-object")
        ->capture_default_str();
    cmd->add_option("--annotations", compare_opts->annotations, "alignment points JSON");
    cmd->add_flag("--json", compare_opts->json_output, "machine-readable output");
    cmd->add_option("--out", compare_opts->out, "write the report to a file");
    cmd->callback([&action, compare_opts] { action = [compare_opts] { return run_compare(*compare_opts); }; });
  }

  auto report_opts = std::make_shared<CompareOpts>();
  {
    CLI::App* cmd = app.add_subcommand("report", "dataset-wide metric report over two directories");
    cmd->add_option("--real-dir", report_opts->real, "directory of real images")->required();
    cmd->add_option("--gen-dir", report_opts->gen, "directory of generated images")->required();
    cmd->add_option("--align", report_opts->align, "alignment: none|global|per-object")
        ->capture_default_str();
    cmd->add_option("--annotations", report_opts->annotations, "alignment points JSON");
    cmd->add_flag("--json", report_opts->json_output, "machine-readable output");
    cmd->add_option("--out", report_opts->out, "write the report to a file");
    cmd->callback([&action, report_opts] { action = [report_opts] { return report_dirs(*report_opts); }; });
  }

  auto align_opts = std::make_shared<AlignOpts>();
  {
    CLI::App* cmd = app.add_subcommand("align", "compute/apply the constrained affine alignment");
    cmd->add_option("--real", align_opts->real, "real image")->required();
    cmd->add_option("--gen", align_opts->gen, "generated image")->required();
    cmd->add_option("--annotations", align_opts->annotations, "alignment points JSON");
    cmd->add_option("--key", align_opts->key, "annotation entry to use")->capture_default_str();
    cmd->add_option("--out-real", align_opts->out_real, "write the warped+cropped real image");
    cmd->add_option("--out-gen", align_opts->out_gen, "write the cropped generated image");
    cmd->add_flag("--suggest", align_opts->suggest, "print contact centroids to aid annotation");
    cmd->add_flag("--json", align_opts->json_output, "machine-readable output");
    cmd->callback([&action, align_opts] { action = [align_opts] { return run_align(*align_opts); }; });
  }

  auto calibrate_opts = std::make_shared<CalibrateOpts>();
  {
    CLI::App* cmd =
        app.add_subcommand("calibrate", "pixel pitch from an object of known size");
    cmd->add_option("--object-side", calibrate_opts->object_side, "object side length, meters")
        ->required();
    double span_value = 0.0;
    auto* span_opt = cmd->add_option("--pixel-span", span_value, "measured span in pixels");
    cmd->add_option("--depth", calibrate_opts->depth, "depth map to measure the span from");
    cmd->add_option("--d-max", calibrate_opts->d_max, "activation depth for the contact mask")
        ->capture_default_str();
    cmd->add_flag("--json", calibrate_opts->json_output, "machine-readable output");
    cmd->callback([&action, calibrate_opts, span_opt, span_value]() mutable {
      if (span_opt->count() > 0) calibrate_opts->pixel_span = span_value;
      action = [calibrate_opts] { return run_calibrate(*calibrate_opts); };
    });
  }

  auto config_opts = std::make_shared<ConfigOpts>();
  {
    CLI::App* cmd = app.add_subcommand("config", "validate or dump pipeline configs");
    cmd->add_option("--file", config_opts->file, "config to load (omit for the embedded default)");
    cmd->add_flag("--dump", config_opts->dump, "print the normalized config JSON");
    cmd->add_flag("--lenient", config_opts->lenient, "downgrade unknown keys to warnings");
    cmd->callback([&action, config_opts] { action = [config_opts] { return run_config(*config_opts); }; });
  }

  auto fetch_opts = std::make_shared<FetchOpts>();
  {
    CLI::App* cmd = app.add_subcommand("fetch-dataset",
                                       "download and verify the evaluation dataset");
    cmd->add_option("--manifest", fetch_opts->manifest, "manifest JSON with urls and sha256 digests")
        ->required();
    cmd->add_option("--out-dir", fetch_opts->out_dir, "download directory")->required();
    cmd->add_option("--base-url", fetch_opts->base_url, "override the manifest base url");
    cmd->add_flag("--no-unpack", fetch_opts->no_unpack, "skip archive extraction");
    cmd->callback([&action, fetch_opts] { action = [fetch_opts] { return run_fetch(*fetch_opts); }; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);  // prints the message
    return 2;     // usage errors use the I/O-and-usage exit code
  }

  if (threads > 0) {
    setenv("TACTSIM_THREADS", std::to_string(threads).c_str(), 1);
  }
  return guarded(action);
}

}  // namespace tactsim::cli
