#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "glossforge/errors.hpp"

namespace glossforge {

/// Dense row-major 2D grid. x is the column (lateral axis), y the row.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int width, int height, T fill = T{})
      : width_(width), height_(height) {
    if (width < 0 || height < 0) throw DomainError("negative raster dimensions");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  bool contains(int x, int y) const noexcept {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(int x, int y) noexcept { return data_[index(x, y)]; }
  const T& operator()(int x, int y) const noexcept { return data_[index(x, y)]; }

  T& at(int x, int y) {
    if (!contains(x, y)) throw DomainError("raster index out of range");
    return (*this)(x, y);
  }
  const T& at(int x, int y) const {
    if (!contains(x, y)) throw DomainError("raster index out of range");
    return (*this)(x, y);
  }

  std::span<T> pixels() & noexcept { return data_; }
  std::span<const T> pixels() const& noexcept { return data_; }
  std::span<const T> pixels() && = delete;  // would dangle

  template <typename U>
  bool same_shape(const Raster<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  void fill(const T& value) { std::fill(data_.begin(), data_.end(), value); }

  bool operator==(const Raster&) const = default;

 private:
  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> data_;
};

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  bool operator==(const Rgb&) const = default;
};

using ImageF = Raster<double>;
using ImageRgb = Raster<Rgb>;
/// Boolean raster; 0 = clear, 1 = set.
using Mask = Raster<std::uint8_t>;

/// Integer pixel translation.
struct PixelOffset {
  int dx = 0;
  int dy = 0;

  bool operator==(const PixelOffset&) const = default;
};

template <typename A, typename B>
void require_same_shape(const Raster<A>& a, const Raster<B>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeMismatch(std::string(what) + ": raster shapes differ (" +
                        std::to_string(a.width()) + "x" + std::to_string(a.height()) +
                        " vs " + std::to_string(b.width()) + "x" +
                        std::to_string(b.height()) + ")");
  }
}

template <typename T, typename F>
auto map_raster(const Raster<T>& in, F&& fn) {
  using R = std::decay_t<decltype(fn(in(0, 0)))>;
  Raster<R> out(in.width(), in.height());
  auto src = in.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = fn(src[i]);
  return out;
}

/// Rotates counter-clockwise by quarter_turns * 90 degrees (y axis pointing down,
/// as displayed).
template <typename T>
Raster<T> rotate_ccw(const Raster<T>& in, int quarter_turns) {
  const int k = ((quarter_turns % 4) + 4) % 4;
  if (k == 0) return in;
  const int w = in.width();
  const int h = in.height();
  Raster<T> out(k == 2 ? w : h, k == 2 ? h : w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      switch (k) {
        case 1: out(y, w - 1 - x) = in(x, y); break;
        case 2: out(w - 1 - x, h - 1 - y) = in(x, y); break;
        default: out(h - 1 - y, x) = in(x, y); break;
      }
    }
  }
  return out;
}

template <typename T>
Raster<T> crop(const Raster<T>& in, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > in.width() || y0 + h > in.height())
    throw DomainError("crop window outside raster");
  Raster<T> out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out(x, y) = in(x0 + x, y0 + y);
  return out;
}

inline std::pair<double, double> min_max(const ImageF& img) {
  if (img.empty()) throw DegenerateError("min_max of empty raster");
  auto [lo, hi] = std::minmax_element(img.pixels().begin(), img.pixels().end());
  return {*lo, *hi};
}

inline double mean(const ImageF& img) {
  if (img.empty()) throw DegenerateError("mean of empty raster");
  double s = 0.0;
  for (double v : img.pixels()) s += v;
  return s / static_cast<double>(img.size());
}

/// Coefficient of variation (population std / mean), optionally restricted to
/// pixels where `exclude` is clear.
inline double coefficient_of_variation(const ImageF& img, const Mask* exclude = nullptr) {
  double s = 0.0, s2 = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      if (exclude && (*exclude)(x, y)) continue;
      const double v = img(x, y);
      s += v;
      s2 += v * v;
      ++n;
    }
  }
  if (n == 0) throw DegenerateError("coefficient_of_variation: no pixels");
  const double m = s / static_cast<double>(n);
  const double var = std::max(0.0, s2 / static_cast<double>(n) - m * m);
  return std::sqrt(var) / m;
}

inline std::size_t count_set(const Mask& m) {
  std::size_t n = 0;
  for (auto v : m.pixels()) n += v ? 1 : 0;
  return n;
}

}  // namespace glossforge
