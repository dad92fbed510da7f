#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "tactsim/image.hpp"
#include "tactsim/vec.hpp"

namespace tactsim {

/// 2x3 affine transform restricted to translation + uniform scale (no
/// rotation or shear; off-diagonal linear terms vanish to 1e-9).
class AlignmentTransform {
public:
  AlignmentTransform() = default;
  /// Row-major coefficients [m00 m01 m02; m10 m11 m12]. Throws
  /// std::invalid_argument if the matrix has rotation/shear above 1e-9,
  /// unequal diagonal terms, or non-positive scale.
  AlignmentTransform(const std::array<double, 6>& coeffs, std::string source_frame = "real",
                     std::string target_frame = "generated");

  double scale() const noexcept { return m_[0]; }
  Vec2 translation() const noexcept { return {m_[2], m_[5]}; }
  const std::array<double, 6>& coefficients() const noexcept { return m_; }
  const std::string& source_frame() const noexcept { return source_; }
  const std::string& target_frame() const noexcept { return target_; }

  Vec2 apply(Vec2 p) const noexcept {
    return {m_[0] * p.x + m_[1] * p.y + m_[2], m_[3] * p.x + m_[4] * p.y + m_[5]};
  }
  Vec2 invert(Vec2 p) const noexcept {
    return {(p.x - m_[2]) / m_[0], (p.y - m_[5]) / m_[4]};
  }

private:
  std::array<double, 6> m_{1, 0, 0, 0, 1, 0};
  std::string source_ = "real";
  std::string target_ = "generated";
};

/// Image-pair similarity metrics.
struct MetricReport {
  double ssim = 1.0;         ///< mean structural similarity, <= 1
  double psnr = 0.0;         ///< dB; +infinity for identical images
  double mae_percent = 0.0;  ///< mean absolute error as % of the 255 range
};

/// Exact translation+scale transform through two point pairs. A third pair
/// is derived in each frame as p3 = p1 + perp(p2 - p1) (same-handed 90
/// degree rotation of the chord), and the unique affine through the three
/// pairs is solved; by construction it has no rotation/shear. Throws
/// std::invalid_argument when either frame's two points coincide.
AlignmentTransform constrained_affine(Vec2 p1_src, Vec2 p2_src, Vec2 p1_dst, Vec2 p2_dst);

/// Warps `real` into the generated frame by t (bilinear sampling), computes
/// the axis-aligned region covered by both images, and crops both to it.
/// The outputs always share dimensions. Throws std::invalid_argument when
/// the common area is empty.
std::pair<TactileImage, TactileImage> warp_and_crop(const TactileImage& real,
                                                    const TactileImage& gen,
                                                    const AlignmentTransform& t);

/// SSIM / PSNR / MAE of two equal-sized images. SSIM uses the reference
/// formulation: 11x11 Gaussian window with sigma 1.5, C1 = (0.01*255)^2,
/// C2 = (0.03*255)^2, windows fully inside the image, channels averaged.
/// Throws std::invalid_argument on a dimension mismatch or images smaller
/// than the SSIM window.
MetricReport compare(const TactileImage& a, const TactileImage& b);

enum class AlignMode { None, Global, PerObject };

/// Manually annotated alignment points: two landmarks in the source (real)
/// frame and the same two landmarks in the target (generated) frame.
struct AlignmentPoints {
  Vec2 p1_src, p2_src, p1_dst, p2_dst;
};

struct PairResult {
  std::string name;  ///< shared file name of the pair
  MetricReport metrics;
};

struct DatasetReport {
  std::vector<PairResult> pairs;
  MetricReport mean;
  MetricReport sd;
};

/// Compares every same-named PNG pair under two directories, optionally
/// aligning the real image first:
///  - None: raw compare.
///  - Global: one transform from annotations key "global" applied to all.
///  - PerObject: each file uses the annotation entry whose key is the
///    longest prefix of its name.
/// Pairs are processed in sorted name order; mean and standard deviation are
/// aggregated per metric (an infinite pair PSNR makes the aggregates
/// infinite). Throws IoError listing missing counterparts or annotation
/// keys.
DatasetReport dataset_report(const std::string& real_dir, const std::string& gen_dir,
                             AlignMode mode,
                             const std::map<std::string, AlignmentPoints>& annotations = {});

/// JSON and human-readable renderings of a report. JSON schema:
/// {"pairs": [{"name", "ssim", "psnr", "mae_percent"}...],
///  "mean": {...}, "sd": {...}}; an infinite PSNR is serialized as null plus
/// "psnr_infinite": true.
std::string report_to_json(const DatasetReport& report);
std::string report_to_text(const DatasetReport& report);

/// Parse alignment annotations: {"global": {"p1_src": [x, y], "p2_src": ...,
/// "p1_dst": ..., "p2_dst": ...}, "objects": {"<name-prefix>": {...}}}.
/// Throws IoError naming the offending field.
std::map<std::string, AlignmentPoints> parse_alignment_json(const std::string& json_text);

/// Centroid of the pixels deviating from the border-ring mean color by more
/// than `threshold` (L1 over channels); falls back to the image center when
/// nothing deviates. Helper for picking alignment landmarks.
Vec2 contact_centroid(const TactileImage& image, double threshold = 30.0);

}  // namespace tactsim
