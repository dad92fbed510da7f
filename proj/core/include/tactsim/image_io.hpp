#pragma once

#include <optional>
#include <string>

#include "tactsim/image.hpp"

namespace tactsim {

/// Scalar rasters on disk.
///
/// Two formats, chosen by file extension:
///  - .pfm : grayscale Portable Float Map ("Pf"), 32-bit floats, scale header
///           -1.0 (little-endian), rows stored bottom-up per the format. Values
///           are meters; lossless enough for round-tripping depth (float32).
///  - .png : 16-bit grayscale. Values are quantized to [0, 65535] against a
///           metric scale stored in a tEXt chunk "meters_per_unit" (value of
///           one 16-bit step in meters). Reading applies the scale back;
///           writing picks scale = max_value / 65535 (or 1e-9 for an all-zero
///           raster) unless an explicit scale is passed.
///
/// All loaders throw tactsim::IoError on missing files, malformed headers, or
/// short reads.
DepthMap read_depth(const std::string& path);
void write_depth(const std::string& path, const DepthMap& depth,
                 std::optional<double> png_meters_per_unit = std::nullopt);

HeightMap read_height(const std::string& path);
void write_height(const std::string& path, const HeightMap& height,
                  std::optional<double> png_meters_per_unit = std::nullopt);

/// 8-bit RGB PNG. Grayscale PNGs are promoted to RGB on read; 16-bit
/// channels are narrowed to 8 bits (tactile images are 8-bit by definition).
TactileImage read_rgb(const std::string& path);
void write_rgb(const std::string& path, const TactileImage& image);

}  // namespace tactsim
