#include "tactsim/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <set>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "tactsim/error.hpp"
#include "tactsim/image_io.hpp"

namespace tactsim {

namespace {

using json = nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite6(const std::array<double, 6>& m) {
  return std::all_of(m.begin(), m.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

AlignmentTransform::AlignmentTransform(const std::array<double, 6>& coeffs,
                                       std::string source_frame, std::string target_frame)
    : m_(coeffs), source_(std::move(source_frame)), target_(std::move(target_frame)) {
  if (!finite6(m_)) {
    throw std::invalid_argument("alignment transform coefficients must be finite");
  }
  if (std::abs(m_[1]) > 1e-9 || std::abs(m_[3]) > 1e-9) {
    throw std::invalid_argument(
        "alignment transform has a rotation/shear component; only translation "
        "and uniform scale are allowed");
  }
  if (std::abs(m_[0] - m_[4]) > 1e-9) {
    throw std::invalid_argument("alignment transform scale must be uniform");
  }
  if (!(m_[0] > 0.0)) {
    throw std::invalid_argument("alignment transform scale must be positive");
  }
}

AlignmentTransform constrained_affine(Vec2 p1_src, Vec2 p2_src, Vec2 p1_dst, Vec2 p2_dst) {
  const Vec2 u1 = p2_src - p1_src;
  const Vec2 v1 = p2_dst - p1_dst;
  if (u1.x == 0.0 && u1.y == 0.0) {
    throw std::invalid_argument("source alignment points coincide");
  }
  if (v1.x == 0.0 && v1.y == 0.0) {
    throw std::invalid_argument("destination alignment points coincide");
  }
  // Third pair: the chord rotated 90 degrees with the same handedness in both
  // frames, so each triple forms a right isosceles triangle and the exact
  // affine through the three pairs is conformal (no shear).
  const Vec2 u2 = perp(u1);  // p3_src - p1_src
  const Vec2 v2 = perp(v1);  // p3_dst - p1_dst

  // Linear part M solves M*[u1 u2] = [v1 v2]; the translation pins p1.
  const double det = u1.x * u2.y - u2.x * u1.y;  // = |u1|^2 > 0 here
  const double m00 = (v1.x * u2.y - v2.x * u1.y) / det;
  const double m01 = (v2.x * u1.x - v1.x * u2.x) / det;
  const double m10 = (v1.y * u2.y - v2.y * u1.y) / det;
  const double m11 = (v2.y * u1.x - v1.y * u2.x) / det;
  const double tx = p1_dst.x - (m00 * p1_src.x + m01 * p1_src.y);
  const double ty = p1_dst.y - (m10 * p1_src.x + m11 * p1_src.y);

  if (std::abs(m01) > 1e-9 || std::abs(m10) > 1e-9) {
    throw std::invalid_argument(
        "alignment points imply a rotation: the source and destination chords "
        "must be parallel");
  }
  return AlignmentTransform({m00, m01, tx, m10, m11, ty});
}

namespace {

/// Bilinear fetch of one channel with the sample point guaranteed in bounds.
double sample_channel(const TactileImage& img, double sx, double sy, int c) {
  const int x0 = std::clamp(static_cast<int>(std::floor(sx)), 0, img.width() - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(sy)), 0, img.height() - 1);
  const int x1 = std::min(x0 + 1, img.width() - 1);
  const int y1 = std::min(y0 + 1, img.height() - 1);
  const double ax = std::clamp(sx - x0, 0.0, 1.0);
  const double ay = std::clamp(sy - y0, 0.0, 1.0);
  const double top = (1.0 - ax) * img.channel(x0, y0, c) + ax * img.channel(x1, y0, c);
  const double bot = (1.0 - ax) * img.channel(x0, y1, c) + ax * img.channel(x1, y1, c);
  return (1.0 - ay) * top + ay * bot;
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace

std::pair<TactileImage, TactileImage> warp_and_crop(const TactileImage& real,
                                                    const TactileImage& gen,
                                                    const AlignmentTransform& t) {
  if (real.empty() || gen.empty()) {
    throw std::invalid_argument("warp_and_crop requires non-empty images");
  }
  // The warped real frame covers the image of real's pixel rectangle under t.
  // t is translation + positive uniform scale, so corners map to corners.
  const Vec2 lo = t.apply({0.0, 0.0});
  const Vec2 hi = t.apply({static_cast<double>(real.width() - 1),
                           static_cast<double>(real.height() - 1)});
  const int x0 = static_cast<int>(std::ceil(std::max(0.0, lo.x)));
  const int y0 = static_cast<int>(std::ceil(std::max(0.0, lo.y)));
  const int x1 = static_cast<int>(std::floor(std::min<double>(gen.width() - 1, hi.x)));
  const int y1 = static_cast<int>(std::floor(std::min<double>(gen.height() - 1, hi.y)));
  if (x0 > x1 || y0 > y1) {
    throw std::invalid_argument("aligned images share no common area");
  }

  const int cw = x1 - x0 + 1;
  const int ch = y1 - y0 + 1;
  TactileImage warped(cw, ch);
  TactileImage cropped(cw, ch);
  for (int y = 0; y < ch; ++y) {
    for (int x = 0; x < cw; ++x) {
      const Vec2 src = t.invert({static_cast<double>(x + x0), static_cast<double>(y + y0)});
      warped.set(x, y,
                 {to_byte(sample_channel(real, src.x, src.y, 0)),
                  to_byte(sample_channel(real, src.x, src.y, 1)),
                  to_byte(sample_channel(real, src.x, src.y, 2))});
      cropped.set(x, y, gen(x + x0, y + y0));
    }
  }
  return {std::move(warped), std::move(cropped)};
}

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kC1 = (0.01 * 255.0) * (0.01 * 255.0);
constexpr double kC2 = (0.03 * 255.0) * (0.03 * 255.0);

/// Sequential separable clamp-to-edge blur of a plane. Only values at least
/// `radius` away from every border are later read, where clamping is inert
/// and the result equals the true windowed sum.
std::vector<double> blur_plane(const std::vector<double>& src, int w, int h,
                               const std::vector<double>& taps) {
  const int r = static_cast<int>(taps.size() / 2);
  std::vector<double> mid(src.size(), 0.0);
  std::vector<double> dst(src.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    const double* in = src.data() + static_cast<std::size_t>(y) * w;
    double* out = mid.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -r; t <= r; ++t) {
        acc += taps[t + r] * in[std::clamp(x + t, 0, w - 1)];
      }
      out[x] = acc;
    }
  }
  for (int y = 0; y < h; ++y) {
    double* out = dst.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int t = -r; t <= r; ++t) {
        const int yy = std::clamp(y + t, 0, h - 1);
        acc += taps[t + r] * mid[static_cast<std::size_t>(yy) * w + x];
      }
      out[x] = acc;
    }
  }
  return dst;
}

/// Mean SSIM of one channel over all fully interior 11x11 windows.
double ssim_channel(const TactileImage& a, const TactileImage& b, int c,
                    const std::vector<double>& taps) {
  const int w = a.width();
  const int h = a.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * w + i;
      const double av = a.channel(i, j, c);
      const double bv = b.channel(i, j, c);
      x[k] = av;
      y[k] = bv;
      xx[k] = av * av;
      yy[k] = bv * bv;
      xy[k] = av * bv;
    }
  }
  const std::vector<double> mx = blur_plane(x, w, h, taps);
  const std::vector<double> my = blur_plane(y, w, h, taps);
  const std::vector<double> mxx = blur_plane(xx, w, h, taps);
  const std::vector<double> myy = blur_plane(yy, w, h, taps);
  const std::vector<double> mxy = blur_plane(xy, w, h, taps);

  const int r = kSsimWindow / 2;
  double total = 0.0;
  std::size_t count = 0;
  for (int j = r; j < h - r; ++j) {
    for (int i = r; i < w - r; ++i) {
      const std::size_t k = static_cast<std::size_t>(j) * w + i;
      const double mu_x = mx[k];
      const double mu_y = my[k];
      const double var_x = mxx[k] - mu_x * mu_x;
      const double var_y = myy[k] - mu_y * mu_y;
      const double cov = mxy[k] - mu_x * mu_y;
      const double num = (2.0 * mu_x * mu_y + kC1) * (2.0 * cov + kC2);
      const double den = (mu_x * mu_x + mu_y * mu_y + kC1) * (var_x + var_y + kC2);
      total += num / den;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

}  // namespace

MetricReport compare(const TactileImage& a, const TactileImage& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw std::invalid_argument("compared images must share dimensions");
  }
  if (a.width() < kSsimWindow || a.height() < kSsimWindow) {
    throw std::invalid_argument("compared images must be at least 11x11 (the SSIM window)");
  }

  double abs_sum = 0.0;
  double sq_sum = 0.0;
  const std::vector<std::uint8_t>& pa = a.bytes();
  const std::vector<std::uint8_t>& pb = b.bytes();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = static_cast<double>(pa[i]) - static_cast<double>(pb[i]);
    abs_sum += std::abs(d);
    sq_sum += d * d;
  }
  const double n = static_cast<double>(pa.size());

  MetricReport report;
  report.mae_percent = abs_sum / n / 255.0 * 100.0;
  const double mse = sq_sum / n;
  report.psnr = mse == 0.0 ? kInf : 10.0 * std::log10(255.0 * 255.0 / mse);

  const std::vector<double> taps = gaussian_taps(kSsimWindow, kSsimSigma);
  double ssim = 0.0;
  for (int c = 0; c < 3; ++c) ssim += ssim_channel(a, b, c, taps);
  report.ssim = ssim / 3.0;
  return report;
}

namespace {

const AlignmentPoints& annotation_for(const std::map<std::string, AlignmentPoints>& annotations,
                                      const std::string& name, AlignMode mode) {
  if (mode == AlignMode::Global) {
    const auto it = annotations.find("global");
    if (it == annotations.end()) {
      throw IoError("global alignment requested but the annotations have no 'global' entry");
    }
    return it->second;
  }
  // Per-object: the entry whose key is the longest prefix of the file name.
  const AlignmentPoints* best = nullptr;
  std::size_t best_len = 0;
  for (const auto& [key, points] : annotations) {
    if (key.size() >= best_len && name.rfind(key, 0) == 0) {
      best = &points;
      best_len = key.size();
    }
  }
  if (best == nullptr) {
    throw IoError("no alignment annotation matches pair '" + name + "'");
  }
  return *best;
}

std::set<std::string> list_pngs(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw IoError("not a directory: " + dir);
  }
  std::set<std::string> names;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") {
      names.insert(entry.path().filename().string());
    }
  }
  return names;
}

double aggregate_mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

/// Population standard deviation; infinity propagates from the mean.
double aggregate_sd(const std::vector<double>& v, double mean) {
  if (std::isinf(mean)) return kInf;
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size()));
}

}  // namespace

DatasetReport dataset_report(const std::string& real_dir, const std::string& gen_dir,
                             AlignMode mode,
                             const std::map<std::string, AlignmentPoints>& annotations) {
  namespace fs = std::filesystem;
  const std::set<std::string> real_names = list_pngs(real_dir);
  const std::set<std::string> gen_names = list_pngs(gen_dir);
  if (real_names != gen_names) {
    std::string msg = "dataset manifests differ:";
    for (const std::string& name : real_names) {
      if (!gen_names.count(name)) msg += " missing generated " + name + ";";
    }
    for (const std::string& name : gen_names) {
      if (!real_names.count(name)) msg += " missing real " + name + ";";
    }
    throw IoError(msg);
  }
  if (real_names.empty()) {
    throw IoError("no .png pairs found under " + real_dir);
  }

  DatasetReport report;
  for (const std::string& name : real_names) {  // std::set iterates sorted
    TactileImage real = read_rgb((fs::path(real_dir) / name).string());
    TactileImage gen = read_rgb((fs::path(gen_dir) / name).string());
    MetricReport metrics;
    if (mode == AlignMode::None) {
      metrics = compare(real, gen);
    } else {
      const AlignmentPoints& pts = annotation_for(annotations, name, mode);
      const AlignmentTransform t =
          constrained_affine(pts.p1_src, pts.p2_src, pts.p1_dst, pts.p2_dst);
      const auto [warped, cropped] = warp_and_crop(real, gen, t);
      metrics = compare(warped, cropped);
    }
    report.pairs.push_back({name, metrics});
  }

  std::vector<double> ssim, psnr, mae;
  for (const PairResult& pair : report.pairs) {
    ssim.push_back(pair.metrics.ssim);
    psnr.push_back(pair.metrics.psnr);
    mae.push_back(pair.metrics.mae_percent);
  }
  report.mean.ssim = aggregate_mean(ssim);
  report.mean.psnr = aggregate_mean(psnr);
  report.mean.mae_percent = aggregate_mean(mae);
  report.sd.ssim = aggregate_sd(ssim, report.mean.ssim);
  report.sd.psnr = aggregate_sd(psnr, report.mean.psnr);
  report.sd.mae_percent = aggregate_sd(mae, report.mean.mae_percent);
  return report;
}

namespace {

json metrics_to_json(const MetricReport& m) {
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

std::string format_metric(double v) {
  if (std::isinf(v)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string report_to_json(const DatasetReport& report) {
  json j;
  j["pairs"] = json::array();
  for (const PairResult& pair : report.pairs) {
    json entry = metrics_to_json(pair.metrics);
    entry["name"] = pair.name;
    j["pairs"].push_back(std::move(entry));
  }
  j["mean"] = metrics_to_json(report.mean);
  j["sd"] = metrics_to_json(report.sd);
  return j.dump(2) + "\n";
}

std::string report_to_text(const DatasetReport& report) {
  std::string out;
  std::size_t name_width = 4;
  for (const PairResult& pair : report.pairs) {
    name_width = std::max(name_width, pair.name.size());
  }
  const auto row = [&](const std::string& name, const MetricReport& m) {
    out += name;
    out.append(name_width + 2 - name.size(), ' ');
    out += format_metric(m.ssim) + "  " + format_metric(m.psnr) + "  " +
           format_metric(m.mae_percent) + "\n";
  };
  out += "name";
  out.append(name_width + 2 - 4, ' ');
  out += "ssim    psnr     mae%\n";
  for (const PairResult& pair : report.pairs) row(pair.name, pair.metrics);
  row("mean", report.mean);
  row("sd", report.sd);
  return out;
}

namespace {

Vec2 parse_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw IoError("invalid alignment JSON at " + where + ": expected [x, y]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

AlignmentPoints parse_points(const json& j, const std::string& where) {
  if (!j.is_object()) {
    throw IoError("invalid alignment JSON at " + where + ": expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "p1_src" && key != "p2_src" && key != "p1_dst" && key != "p2_dst") {
      throw IoError("invalid alignment JSON at " + where + ": unknown key '" + key + "'");
    }
  }
  for (const char* key : {"p1_src", "p2_src", "p1_dst", "p2_dst"}) {
    if (!j.contains(key)) {
      throw IoError("invalid alignment JSON at " + where + ": missing '" + std::string(key) +
                    "'");
    }
  }
  AlignmentPoints pts;
  pts.p1_src = parse_point(j["p1_src"], where + ".p1_src");
  pts.p2_src = parse_point(j["p2_src"], where + ".p2_src");
  pts.p1_dst = parse_point(j["p1_dst"], where + ".p1_dst");
  pts.p2_dst = parse_point(j["p2_dst"], where + ".p2_dst");
  return pts;
}

}  // namespace

std::map<std::string, AlignmentPoints> parse_alignment_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("invalid alignment JSON: ") + e.what());
  }
  if (!doc.is_object()) {
    throw IoError("invalid alignment JSON: top level must be an object");
  }
  std::map<std::string, AlignmentPoints> out;
  for (const auto& [key, value] : doc.items()) {
    if (key == "global") {
      out.emplace("global", parse_points(value, "global"));
    } else if (key == "objects") {
      if (!value.is_object()) {
        throw IoError("invalid alignment JSON: 'objects' must be an object");
      }
      for (const auto& [name, entry] : value.items()) {
        if (name == "global") {
          throw IoError("invalid alignment JSON: object key 'global' is reserved");
        }
        out.emplace(name, parse_points(entry, "objects." + name));
      }
    } else {
      throw IoError("invalid alignment JSON: unknown key '" + key + "'");
    }
  }
  return out;
}

Vec2 contact_centroid(const TactileImage& image, double threshold) {
  if (image.empty()) {
    throw std::invalid_argument("contact_centroid requires a non-empty image");
  }
  const int w = image.width();
  const int h = image.height();
  // Reference color: mean over the one-pixel border ring (assumed
  // contact-free background).
  double br = 0.0, bg = 0.0, bb = 0.0;
  std::size_t border = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (x != 0 && x != w - 1 && y != 0 && y != h - 1) continue;
      const Rgb c = image(x, y);
      br += c.r;
      bg += c.g;
      bb += c.b;
      ++border;
    }
  }
  br /= static_cast<double>(border);
  bg /= static_cast<double>(border);
  bb /= static_cast<double>(border);

  double sx = 0.0, sy = 0.0;
  std::size_t count = 0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb c = image(x, y);
      const double dev =
          std::abs(c.r - br) + std::abs(c.g - bg) + std::abs(c.b - bb);
      if (dev > threshold) {
        sx += x;
        sy += y;
        ++count;
      }
    }
  }
  if (count == 0) {
    return {(w - 1) / 2.0, (h - 1) / 2.0};
  }
  return {sx / static_cast<double>(count), sy / static_cast<double>(count)};
}

}  // namespace tactsim
