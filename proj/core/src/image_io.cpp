#include "tactsim/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <vector>

#include "tactsim/error.hpp"

// libpng's error handling requires setjmp; GCC's -Wclobbered flags locals
// living across it, but every value read after the jump here is a parameter
// that is never modified inside the protected region.
#if defined(__GNUC__) && !defined(__clang__)
#pragma GCC diagnostic ignored "-Wclobbered"
#endif

namespace tactsim {

namespace {

constexpr const char* kScaleKey = "meters_per_unit";

std::string ext_of(const std::string& path) {
  const std::size_t dot = path.find_last_of('.');
  if (dot == std::string::npos) return {};
  std::string ext = path.substr(dot);
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) {
    throw IoError("cannot open '" + path + "' for " +
                  (mode[0] == 'r' ? "reading" : "writing"));
  }
  return f;
}

// ---------------------------------------------------------------- PFM ------

float assemble_float(const unsigned char bytes[4], bool file_little_endian) {
  std::uint32_t u = 0;
  if (file_little_endian) {
    u = static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
        (static_cast<std::uint32_t>(bytes[2]) << 16) |
        (static_cast<std::uint32_t>(bytes[3]) << 24);
  } else {
    u = static_cast<std::uint32_t>(bytes[3]) | (static_cast<std::uint32_t>(bytes[2]) << 8) |
        (static_cast<std::uint32_t>(bytes[1]) << 16) |
        (static_cast<std::uint32_t>(bytes[0]) << 24);
  }
  return std::bit_cast<float>(u);
}

void split_float(float v, unsigned char bytes[4]) {  // little-endian
  const auto u = std::bit_cast<std::uint32_t>(v);
  bytes[0] = static_cast<unsigned char>(u & 0xff);
  bytes[1] = static_cast<unsigned char>((u >> 8) & 0xff);
  bytes[2] = static_cast<unsigned char>((u >> 16) & 0xff);
  bytes[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

ScalarField read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");

  std::string magic;
  int width = 0;
  int height = 0;
  double scale = 0.0;
  in >> magic >> width >> height >> scale;
  if (!in) throw IoError("malformed image '" + path + "': truncated PFM header");
  if (magic == "PF") {
    throw IoError("malformed image '" + path + "': color PFM not supported, expected grayscale 'Pf'");
  }
  if (magic != "Pf") {
    throw IoError("malformed image '" + path + "': not a PFM file (magic '" + magic + "')");
  }
  if (width <= 0 || height <= 0) {
    throw IoError("malformed image '" + path + "': non-positive dimensions");
  }
  if (scale == 0.0) {
    throw IoError("malformed image '" + path + "': zero PFM scale");
  }
  in.get();  // single whitespace byte after the scale

  const bool little = scale < 0.0;
  const double factor = std::abs(scale);
  std::vector<unsigned char> row(static_cast<std::size_t>(width) * 4);
  ScalarField field(width, height);
  for (int fy = 0; fy < height; ++fy) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (!in) throw IoError("malformed image '" + path + "': truncated PFM pixel data");
    const int y = height - 1 - fy;  // PFM rows are stored bottom-up
    double* dst = field.row(y);
    for (int x = 0; x < width; ++x) {
      const double v = factor * assemble_float(&row[static_cast<std::size_t>(x) * 4], little);
      if (!std::isfinite(v)) {
        throw IoError("malformed image '" + path + "': non-finite sample");
      }
      dst[x] = v;
    }
  }
  return field;
}

void write_pfm(const std::string& path, const ScalarField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "Pf\n" << field.width() << " " << field.height() << "\n-1.0\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(field.width()) * 4);
  for (int fy = 0; fy < field.height(); ++fy) {
    const int y = field.height() - 1 - fy;
    const double* src = field.row(y);
    for (int x = 0; x < field.width(); ++x) {
      split_float(static_cast<float>(src[x]), &row[static_cast<std::size_t>(x) * 4]);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw IoError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------- PNG ------

struct PngReader {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngReader() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
  }
};

struct PngWriter {
  png_structp png = nullptr;
  png_infop info = nullptr;
  ~PngWriter() {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
  }
};

ScalarField read_gray16_png(const std::string& path, double* meters_per_unit) {
  FilePtr file = open_file(path, "rb");
  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw IoError("libpng initialization failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw IoError("libpng initialization failed");
  if (setjmp(png_jmpbuf(r.png))) {
    throw IoError("malformed image '" + path + "': libpng rejected the file");
  }
  png_init_io(r.png, file.get());
  png_read_info(r.png, r.info);

  const png_uint_32 w = png_get_image_width(r.png, r.info);
  const png_uint_32 h = png_get_image_height(r.png, r.info);
  const int depth = png_get_bit_depth(r.png, r.info);
  const int color = png_get_color_type(r.png, r.info);
  if (color != PNG_COLOR_TYPE_GRAY || depth != 16) {
    throw IoError("malformed image '" + path +
                  "': expected 16-bit grayscale PNG for metric rasters");
  }
  if (w == 0 || h == 0) throw IoError("malformed image '" + path + "': zero dimension");

  double scale = 0.0;
  png_textp texts = nullptr;
  int n_text = png_get_text(r.png, r.info, &texts, nullptr);
  for (int i = 0; i < n_text; ++i) {
    if (texts[i].key && std::strcmp(texts[i].key, kScaleKey) == 0 && texts[i].text) {
      try {
        scale = std::stod(texts[i].text);
      } catch (const std::exception&) {
        throw IoError("malformed image '" + path + "': unparseable " + kScaleKey + " chunk");
      }
    }
  }
  if (!(scale > 0.0)) {
    throw IoError("malformed image '" + path + "': missing or non-positive " +
                  std::string(kScaleKey) + " tEXt chunk");
  }
  *meters_per_unit = scale;

  ScalarField field(static_cast<int>(w), static_cast<int>(h));
  std::vector<unsigned char> row(static_cast<std::size_t>(w) * 2);
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(r.png, row.data(), nullptr);
    double* dst = field.row(static_cast<int>(y));
    for (png_uint_32 x = 0; x < w; ++x) {
      const unsigned hi = row[2 * x];  // PNG 16-bit samples are big-endian
      const unsigned lo = row[2 * x + 1];
      dst[x] = scale * static_cast<double>((hi << 8) | lo);
    }
  }
  png_read_end(r.png, nullptr);
  return field;
}

void write_gray16_png(const std::string& path, const ScalarField& field,
                      std::optional<double> meters_per_unit) {
  double min_v = field.values()[0];
  double max_v = min_v;
  for (double v : field.values()) {
    min_v = std::min(min_v, v);
    max_v = std::max(max_v, v);
  }
  if (min_v < 0.0) {
    throw IoError("cannot write '" + path +
                  "': negative values do not fit 16-bit PNG; use the .pfm format");
  }
  const double scale =
      meters_per_unit.value_or(max_v > 0.0 ? max_v / 65535.0 : 1e-9);
  if (!(scale > 0.0)) throw IoError("meters_per_unit scale must be positive");

  FilePtr file = open_file(path, "wb");
  PngWriter wr;
  wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!wr.png) throw IoError("libpng initialization failed");
  wr.info = png_create_info_struct(wr.png);
  if (!wr.info) throw IoError("libpng initialization failed");
  if (setjmp(png_jmpbuf(wr.png))) {
    throw IoError("failed writing '" + path + "'");
  }
  png_init_io(wr.png, file.get());
  png_set_IHDR(wr.png, wr.info, static_cast<png_uint_32>(field.width()),
               static_cast<png_uint_32>(field.height()), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);

  char scale_text[64];
  std::snprintf(scale_text, sizeof scale_text, "%.17g", scale);
  png_text text{};
  text.compression = PNG_TEXT_COMPRESSION_NONE;
  text.key = const_cast<char*>(kScaleKey);
  text.text = scale_text;
  text.text_length = std::strlen(scale_text);
  png_set_text(wr.png, wr.info, &text, 1);
  png_write_info(wr.png, wr.info);

  std::vector<unsigned char> row(static_cast<std::size_t>(field.width()) * 2);
  for (int y = 0; y < field.height(); ++y) {
    const double* src = field.row(y);
    for (int x = 0; x < field.width(); ++x) {
      double q = std::nearbyint(src[x] / scale);
      q = std::clamp(q, 0.0, 65535.0);
      const auto u = static_cast<std::uint16_t>(q);
      row[2 * static_cast<std::size_t>(x)] = static_cast<unsigned char>(u >> 8);
      row[2 * static_cast<std::size_t>(x) + 1] = static_cast<unsigned char>(u & 0xff);
    }
    png_write_row(wr.png, row.data());
  }
  png_write_end(wr.png, nullptr);
}

ScalarField read_scalar(const std::string& path) {
  const std::string ext = ext_of(path);
  if (ext == ".pfm") return read_pfm(path);
  if (ext == ".png") {
    double scale = 0.0;
    return read_gray16_png(path, &scale);
  }
  throw IoError("unsupported raster format '" + ext + "' for '" + path +
                "' (expected .pfm or .png)");
}

void write_scalar(const std::string& path, const ScalarField& field,
                  std::optional<double> png_scale) {
  const std::string ext = ext_of(path);
  if (ext == ".pfm") {
    write_pfm(path, field);
  } else if (ext == ".png") {
    write_gray16_png(path, field, png_scale);
  } else {
    throw IoError("unsupported raster format '" + ext + "' for '" + path +
                  "' (expected .pfm or .png)");
  }
}

}  // namespace

DepthMap read_depth(const std::string& path) {
  ScalarField field = read_scalar(path);
  DepthMap depth(field.width(), field.height());
  depth.values() = std::move(field.values());
  try {
    require_valid(depth);
  } catch (const std::invalid_argument& e) {
    throw IoError("malformed image '" + path + "': " + e.what());
  }
  return depth;
}

void write_depth(const std::string& path, const DepthMap& depth,
                 std::optional<double> png_meters_per_unit) {
  require_valid(depth);
  write_scalar(path, depth, png_meters_per_unit);
}

HeightMap read_height(const std::string& path) {
  ScalarField field = read_scalar(path);
  HeightMap height(field.width(), field.height());
  height.values() = std::move(field.values());
  try {
    require_valid(height);
  } catch (const std::invalid_argument& e) {
    throw IoError("malformed image '" + path + "': " + e.what());
  }
  return height;
}

void write_height(const std::string& path, const HeightMap& height,
                  std::optional<double> png_meters_per_unit) {
  require_valid(height);
  write_scalar(path, height, png_meters_per_unit);
}

TactileImage read_rgb(const std::string& path) {
  FilePtr file = open_file(path, "rb");
  PngReader r;
  r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!r.png) throw IoError("libpng initialization failed");
  r.info = png_create_info_struct(r.png);
  if (!r.info) throw IoError("libpng initialization failed");
  if (setjmp(png_jmpbuf(r.png))) {
    throw IoError("malformed image '" + path + "': libpng rejected the file");
  }
  png_init_io(r.png, file.get());
  png_read_info(r.png, r.info);

  // Normalize every input to 8-bit RGB: palettes expand, grayscale
  // replicates, 16-bit narrows, alpha drops.
  png_set_palette_to_rgb(r.png);
  png_set_expand_gray_1_2_4_to_8(r.png);
  png_set_gray_to_rgb(r.png);
  png_set_strip_16(r.png);
  png_set_strip_alpha(r.png);
  png_read_update_info(r.png, r.info);

  const png_uint_32 w = png_get_image_width(r.png, r.info);
  const png_uint_32 h = png_get_image_height(r.png, r.info);
  if (w == 0 || h == 0) throw IoError("malformed image '" + path + "': zero dimension");
  if (png_get_channels(r.png, r.info) != 3 || png_get_bit_depth(r.png, r.info) != 8) {
    throw IoError("malformed image '" + path + "': cannot normalize to 8-bit RGB");
  }

  TactileImage image(static_cast<int>(w), static_cast<int>(h));
  for (png_uint_32 y = 0; y < h; ++y) {
    png_read_row(r.png, image.bytes().data() + 3 * static_cast<std::size_t>(y) * w, nullptr);
  }
  png_read_end(r.png, nullptr);
  return image;
}

void write_rgb(const std::string& path, const TactileImage& image) {
  if (image.empty()) throw IoError("cannot write empty image to '" + path + "'");
  FilePtr file = open_file(path, "wb");
  PngWriter wr;
  wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!wr.png) throw IoError("libpng initialization failed");
  wr.info = png_create_info_struct(wr.png);
  if (!wr.info) throw IoError("libpng initialization failed");
  if (setjmp(png_jmpbuf(wr.png))) {
    throw IoError("failed writing '" + path + "'");
  }
  png_init_io(wr.png, file.get());
  png_set_IHDR(wr.png, wr.info, static_cast<png_uint_32>(image.width()),
               static_cast<png_uint_32>(image.height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(wr.png, wr.info);
  for (int y = 0; y < image.height(); ++y) {
    png_write_row(wr.png, const_cast<unsigned char*>(image.bytes().data() +
                                                     3 * static_cast<std::size_t>(y) *
                                                         image.width()));
  }
  png_write_end(wr.png, nullptr);
}

}  // namespace tactsim
