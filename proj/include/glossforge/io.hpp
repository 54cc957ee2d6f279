#pragma once

#include <png.h>
#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glossforge/errors.hpp"
#include "glossforge/raster.hpp"

namespace glossforge::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline void require_exists(const fs::path& p) {
  if (!fs::exists(p)) throw MissingInput(p.string());
}

inline std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  require_exists(p);
  std::ifstream in(p, std::ios::binary);
  if (!in) throw FormatError("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const fs::path& p, const void* data, std::size_t n) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + p.string());
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw FormatError("short write to " + p.string());
}

inline std::string read_text(const fs::path& p) {
  const auto b = read_bytes(p);
  return {b.begin(), b.end()};
}

inline void write_text(const fs::path& p, const std::string& s) { write_bytes(p, s.data(), s.size()); }

inline json read_json(const fs::path& p) {
  try {
    return json::parse(read_text(p));
  } catch (const json::parse_error& e) {
    throw FormatError(p.string() + ": " + e.what());
  }
}

inline void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

inline std::string to_hex(const unsigned char* d, std::size_t n) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s(2 * n, '0');
  for (std::size_t i = 0; i < n; ++i) {
    s[2 * i] = kDigits[d[i] >> 4];
    s[2 * i + 1] = kDigits[d[i] & 15];
  }
  return s;
}

inline std::string sha256(const void* data, std::size_t n) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data, n) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1)
    throw Error("sha256 failed");
  return to_hex(md, len);
}

inline std::string sha256(const std::string& s) { return sha256(s.data(), s.size()); }

inline std::string sha256_file(const fs::path& p) {
  const auto b = read_bytes(p);
  return sha256(b.data(), b.size());
}

// ---- GFR1 float rasters ----------------------------------------------------

struct FloatRaster {
  ImageF values;
  double pixel_pitch_um = 0.0;
};

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
inline std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}
inline void put_f32(std::vector<std::uint8_t>& b, float f) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  put_u32(b, u);
}
inline float get_f32(const std::uint8_t* p) {
  const std::uint32_t u = get_u32(p);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

}  // namespace detail

inline std::vector<std::uint8_t> encode_gfr1(const ImageF& img, double pixel_pitch_um) {
  std::vector<std::uint8_t> b;
  b.reserve(16 + 4 * img.size());
  for (char c : {'G', 'F', 'R', '1'}) b.push_back(static_cast<std::uint8_t>(c));
  detail::put_u32(b, static_cast<std::uint32_t>(img.width()));
  detail::put_u32(b, static_cast<std::uint32_t>(img.height()));
  detail::put_f32(b, static_cast<float>(pixel_pitch_um));
  for (double v : img.pixels()) {
    if (std::isnan(v)) throw FormatError("GFR1 rasters cannot hold NaN");
    detail::put_f32(b, static_cast<float>(v));
  }
  return b;
}

inline FloatRaster decode_gfr1(const std::vector<std::uint8_t>& b, const std::string& name = "GFR1") {
  if (b.size() < 16 || std::memcmp(b.data(), "GFR1", 4) != 0) throw FormatError(name + ": not a GFR1 raster");
  const std::uint32_t w = detail::get_u32(b.data() + 4), h = detail::get_u32(b.data() + 8);
  if (b.size() != 16 + 4ull * w * h) throw FormatError(name + ": size does not match header");
  FloatRaster r{ImageF(static_cast<int>(w), static_cast<int>(h)), detail::get_f32(b.data() + 12)};
  auto px = r.values.pixels();
  for (std::size_t i = 0; i < px.size(); ++i) {
    px[i] = detail::get_f32(b.data() + 16 + 4 * i);
    if (std::isnan(px[i])) throw FormatError(name + ": NaN sample");
  }
  return r;
}

inline void write_gfr1(const fs::path& p, const ImageF& img, double pixel_pitch_um) {
  const auto b = encode_gfr1(img, pixel_pitch_um);
  write_bytes(p, b.data(), b.size());
}

inline FloatRaster read_gfr1(const fs::path& p) { return decode_gfr1(read_bytes(p), p.string()); }

// ---- PNG -------------------------------------------------------------------

namespace detail {

struct PngWriter {
  FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;

  explicit PngWriter(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    fp = std::fopen(p.string().c_str(), "wb");
    if (!fp) throw FormatError("cannot write " + p.string());
    png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    info = png ? png_create_info_struct(png) : nullptr;
    if (!info) throw FormatError("libpng initialisation failed");
  }
  ~PngWriter() {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    if (fp) std::fclose(fp);
  }
  PngWriter(const PngWriter&) = delete;
  PngWriter& operator=(const PngWriter&) = delete;
};

struct PngReader {
  FILE* fp = nullptr;
  png_structp png = nullptr;
  png_infop info = nullptr;

  explicit PngReader(const fs::path& p) {
    require_exists(p);
    fp = std::fopen(p.string().c_str(), "rb");
    if (!fp) throw FormatError("cannot open " + p.string());
    png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    info = png ? png_create_info_struct(png) : nullptr;
    if (!info) throw FormatError("libpng initialisation failed");
  }
  ~PngReader() {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
  PngReader(const PngReader&) = delete;
  PngReader& operator=(const PngReader&) = delete;
};

/// Writes rows of already packed bytes. libpng reports errors by longjmp, so
/// nothing with a destructor may be created between setjmp and the last call.
inline void write_png_rows(const fs::path& p, int w, int h, int bit_depth, int color_type,
                           const std::vector<std::uint8_t>& data, std::size_t stride,
                           const std::vector<png_color>* palette = nullptr) {
  PngWriter wr(p);
  std::vector<png_bytep> rows(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) rows[y] = const_cast<png_bytep>(data.data() + y * stride);
  if (setjmp(png_jmpbuf(wr.png))) throw FormatError("libpng failed writing " + p.string());
  png_init_io(wr.png, wr.fp);
  png_set_compression_level(wr.png, 6);
  png_set_IHDR(wr.png, wr.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), bit_depth, color_type,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  if (palette) png_set_PLTE(wr.png, wr.info, palette->data(), static_cast<int>(palette->size()));
  png_write_info(wr.png, wr.info);
  png_write_image(wr.png, rows.data());
  png_write_end(wr.png, nullptr);
}

struct PngImage {
  int width = 0, height = 0, bit_depth = 0, color_type = 0;
  std::vector<std::uint8_t> data;
  std::size_t stride = 0;
};

inline PngImage read_png_rows(const fs::path& p) {
  PngReader rd(p);
  PngImage img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(rd.png))) throw FormatError("libpng failed reading " + p.string());
  png_init_io(rd.png, rd.fp);
  png_read_info(rd.png, rd.info);
  img.width = static_cast<int>(png_get_image_width(rd.png, rd.info));
  img.height = static_cast<int>(png_get_image_height(rd.png, rd.info));
  img.bit_depth = png_get_bit_depth(rd.png, rd.info);
  img.color_type = png_get_color_type(rd.png, rd.info);
  img.stride = png_get_rowbytes(rd.png, rd.info);
  img.data.resize(img.stride * static_cast<std::size_t>(img.height));
  rows.resize(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y) rows[y] = img.data.data() + y * img.stride;
  png_read_image(rd.png, rows.data());
  png_read_end(rd.png, nullptr);
  return img;
}

inline std::uint16_t to_u16(double v) {
  return static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 65535.0));
}

}  // namespace detail

/// Linear RGB in [0, 1] as 16-bit PNG; values outside are clamped.
inline void write_png_rgb16(const fs::path& p, const ImageRgb& img) {
  const std::size_t stride = 6 * static_cast<std::size_t>(img.width());
  std::vector<std::uint8_t> data(stride * img.height());
  std::size_t i = 0;
  for (const Rgb& px : img.pixels())
    for (double c : {px.r, px.g, px.b}) {
      const std::uint16_t v = detail::to_u16(c);
      data[i++] = static_cast<std::uint8_t>(v >> 8);
      data[i++] = static_cast<std::uint8_t>(v & 0xFF);
    }
  detail::write_png_rows(p, img.width(), img.height(), 16, PNG_COLOR_TYPE_RGB, data, stride);
}

inline ImageRgb read_png_rgb16(const fs::path& p) {
  const auto img = detail::read_png_rows(p);
  if (img.bit_depth != 16 || img.color_type != PNG_COLOR_TYPE_RGB)
    throw FormatError(p.string() + ": expected a 16-bit RGB PNG");
  ImageRgb out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const std::uint8_t* q = img.data.data() + y * img.stride + 6 * x;
      auto ch = [&](int c) { return ((q[2 * c] << 8) | q[2 * c + 1]) / 65535.0; };
      out(x, y) = {ch(0), ch(1), ch(2)};
    }
  return out;
}

/// Binary raster as a 1-bit greyscale PNG (nonzero -> white).
inline void write_png_bitmap(const fs::path& p, const Raster<std::uint8_t>& m) {
  const std::size_t stride = (static_cast<std::size_t>(m.width()) + 7) / 8;
  std::vector<std::uint8_t> data(stride * m.height(), 0);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (m(x, y)) data[y * stride + x / 8] |= static_cast<std::uint8_t>(0x80 >> (x % 8));
  detail::write_png_rows(p, m.width(), m.height(), 1, PNG_COLOR_TYPE_GRAY, data, stride);
}

inline Raster<std::uint8_t> read_png_bitmap(const fs::path& p) {
  const auto img = detail::read_png_rows(p);
  if (img.bit_depth != 1 || img.color_type != PNG_COLOR_TYPE_GRAY)
    throw FormatError(p.string() + ": expected a 1-bit greyscale PNG");
  Raster<std::uint8_t> out(img.width, img.height, 0);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      out(x, y) = (img.data[y * img.stride + x / 8] >> (7 - x % 8)) & 1;
  return out;
}

/// 8-bit indexed PNG; indices must be below palette.size().
inline void write_png_indexed(const fs::path& p, const Raster<std::uint8_t>& idx,
                              const std::vector<png_color>& palette) {
  for (std::uint8_t v : idx.pixels())
    if (v >= palette.size()) throw FormatError("palette index out of range in " + p.string());
  const std::vector<std::uint8_t> data(idx.pixels().begin(), idx.pixels().end());
  detail::write_png_rows(p, idx.width(), idx.height(), 8, PNG_COLOR_TYPE_PALETTE, data,
                         static_cast<std::size_t>(idx.width()), &palette);
}

inline Raster<std::uint8_t> read_png_indexed(const fs::path& p) {
  const auto img = detail::read_png_rows(p);
  if (img.bit_depth != 8 || img.color_type != PNG_COLOR_TYPE_PALETTE)
    throw FormatError(p.string() + ": expected an 8-bit indexed PNG");
  Raster<std::uint8_t> out(img.width, img.height, 0);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) out(x, y) = img.data[y * img.stride + x];
  return out;
}

/// Empty, cyan, magenta, yellow, black, white.
inline std::vector<png_color> ink_palette() {
  return {{255, 255, 255}, {0, 255, 255}, {255, 0, 255}, {255, 255, 0}, {0, 0, 0}, {250, 250, 250}};
}

}  // namespace glossforge::io
