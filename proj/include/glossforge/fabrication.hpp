#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "glossforge/errors.hpp"
#include "glossforge/gloss.hpp"
#include "glossforge/masking.hpp"
#include "glossforge/raster.hpp"

namespace glossforge {

/// Glossmeter calibration of the printer: print input value (0-100) to 60 degree
/// specular gloss units.
struct GlossSample {
  double print_value = 0.0;
  double g60 = 0.0;
};

/// Monotone fit through glossmeter samples: pool-adjacent-violators followed by a
/// Fritsch-Carlson monotone cubic through the pooled knots.
class GlossResponseCurve {
 public:
  GlossResponseCurve() = default;
  GlossResponseCurve(std::vector<double> knots_p, std::vector<double> knots_g,
                     std::vector<GlossSample> samples, double max_residual)
      : p_(std::move(knots_p)), g_(std::move(knots_g)), samples_(std::move(samples)),
        max_residual_(max_residual) {
    slopes_ = monotone_slopes(p_, g_);
  }

  bool empty() const noexcept { return p_.empty(); }
  const std::vector<GlossSample>& samples() const noexcept { return samples_; }
  const std::vector<double>& knot_print_values() const noexcept { return p_; }
  const std::vector<double>& knot_g60() const noexcept { return g_; }
  /// Largest |sample - fit| over the samples, GU.
  double max_residual() const noexcept { return max_residual_; }

  double print_min() const { return p_.front(); }
  double print_max() const { return p_.back(); }
  double g60_min() const { return std::min(g_.front(), g_.back()); }
  double g60_max() const { return std::max(g_.front(), g_.back()); }
  bool increasing() const { return g_.back() >= g_.front(); }

  /// g60 for a print value; clamped to the fitted print range.
  double operator()(double print_value) const {
    if (p_.size() == 1) return g_.front();
    const double p = std::clamp(print_value, p_.front(), p_.back());
    const auto it = std::upper_bound(p_.begin(), p_.end(), p);
    const std::size_t i = std::min<std::size_t>(
        static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - p_.begin() - 1, 0)), p_.size() - 2);
    const double h = p_[i + 1] - p_[i];
    const double t = (p - p_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * g_[i] + (t3 - 2 * t2 + t) * h * slopes_[i] +
           (-2 * t3 + 3 * t2) * g_[i + 1] + (t3 - t2) * h * slopes_[i + 1];
  }

  /// Print value whose fitted gloss equals `g60` (bisection on the monotone fit).
  double inverse(double g60) const {
    if (empty()) throw FabricationError("gloss response curve missing");
    const double target = std::clamp(g60, g60_min(), g60_max());
    double lo = p_.front(), hi = p_.back();
    const bool inc = increasing();
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
      const double mid = 0.5 * (lo + hi);
      const bool below = (*this)(mid) < target;
      if (below == inc) lo = mid;
      else hi = mid;
    }
    return 0.5 * (lo + hi);
  }

 private:
  static std::vector<double> monotone_slopes(const std::vector<double>& x,
                                             const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 2) return m;
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i]) / (x[i + 1] - x[i]);
    if (n == 2) {
      m[0] = m[1] = d[0];
      return m;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) {
        m[i] = 0.0;
      } else {
        // Weighted harmonic mean (Fritsch-Butland form used by PCHIP).
        const double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
        m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
      }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
      double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
      if (s * d0 <= 0.0) s = 0.0;
      else if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3 * d0)) s = 3 * d0;
      return s;
    };
    m[0] = end_slope(x[1] - x[0], x[2] - x[1], d[0], d[1]);
    m[n - 1] = end_slope(x[n - 1] - x[n - 2], x[n - 2] - x[n - 3], d[n - 2], d[n - 3]);
    return m;
  }

  std::vector<double> p_, g_, slopes_;
  std::vector<GlossSample> samples_;
  double max_residual_ = 0.0;
};

namespace detail {

/// Weighted pool-adjacent-violators for a non-decreasing fit.
inline std::vector<double> pava_increasing(const std::vector<double>& y, const std::vector<double>& w) {
  struct Block {
    double value, weight;
    std::size_t count;
  };
  std::vector<Block> blocks;
  for (std::size_t i = 0; i < y.size(); ++i) {
    blocks.push_back({y[i], w[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
      const Block b = blocks.back();
      blocks.pop_back();
      Block& a = blocks.back();
      a.value = (a.value * a.weight + b.value * b.weight) / (a.weight + b.weight);
      a.weight += b.weight;
      a.count += b.count;
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks) out.insert(out.end(), b.count, b.value);
  return out;
}

}  // namespace detail

inline GlossResponseCurve fit_gloss_curve(std::vector<GlossSample> samples) {
  if (samples.size() < 3) throw FabricationError("gloss curve needs at least 3 samples");
  for (const auto& s : samples)
    if (!std::isfinite(s.print_value) || !std::isfinite(s.g60) || s.g60 < 0.0)
      throw FabricationError("gloss samples must be finite with g60 >= 0");
  std::sort(samples.begin(), samples.end(), [](const GlossSample& a, const GlossSample& b) {
    return a.print_value != b.print_value ? a.print_value < b.print_value : a.g60 < b.g60;
  });

  // Pool duplicate print values.
  std::vector<double> xs, ys, ws;
  for (std::size_t i = 0; i < samples.size();) {
    std::size_t j = i;
    double s = 0.0;
    while (j < samples.size() && samples[j].print_value == samples[i].print_value) s += samples[j++].g60;
    xs.push_back(samples[i].print_value);
    ys.push_back(s / static_cast<double>(j - i));
    ws.push_back(static_cast<double>(j - i));
    i = j;
  }
  if (xs.size() < 2) throw FabricationError("gloss samples must span at least two print values");

  // Fit both directions, keep the one with the smaller weighted squared error.
  auto sse = [&](const std::vector<double>& fit) {
    double e = 0.0;
    for (std::size_t i = 0; i < fit.size(); ++i) e += ws[i] * (fit[i] - ys[i]) * (fit[i] - ys[i]);
    return e;
  };
  const auto up = detail::pava_increasing(ys, ws);
  std::vector<double> neg(ys.size());
  std::transform(ys.begin(), ys.end(), neg.begin(), [](double v) { return -v; });
  auto down = detail::pava_increasing(neg, ws);
  std::transform(down.begin(), down.end(), down.begin(), [](double v) { return -v; });
  const auto& fit = sse(up) <= sse(down) ? up : down;

  double max_res = 0.0, sum_sq = 0.0;
  double gmin = samples.front().g60, gmax = gmin;
  for (const auto& s : samples) {
    gmin = std::min(gmin, s.g60);
    gmax = std::max(gmax, s.g60);
  }
  for (const auto& s : samples) {
    const auto k = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), s.print_value) - xs.begin());
    const double r = std::abs(s.g60 - fit[k]);
    max_res = std::max(max_res, r);
    sum_sq += r * r;
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(samples.size()));
  if (!(gmax > gmin)) throw FabricationError("gloss samples carry no gloss range");
  if (rms > 0.2 * (gmax - gmin))
    throw FabricationError("gloss samples show no monotone trend (isotonic residual too large)");

  // A pooled block becomes a flat segment between its first and last print value.
  std::vector<double> kp, kg;
  for (std::size_t i = 0; i < xs.size();) {
    std::size_t j = i;
    while (j < xs.size() && fit[j] == fit[i]) ++j;
    kp.push_back(xs[i]);
    kg.push_back(fit[i]);
    if (j > i + 1) {
      kp.push_back(xs[j - 1]);
      kg.push_back(fit[i]);
    }
    i = j;
  }
  return GlossResponseCurve(std::move(kp), std::move(kg), std::move(samples), max_res);
}

/// Maps a normalized gloss map onto the full printable g60 range and inverts the
/// printer response, yielding print values in [0, 100].
inline ImageF gloss_to_print(const GlossMap& map, const GlossResponseCurve& curve) {
  if (curve.empty()) throw FabricationError("gloss response curve missing");
  if (!map.normalized) throw DomainError("gloss_to_print expects a normalized gloss map");
  const double lo = curve.g60_min(), hi = curve.g60_max();
  return map_raster(map.values, [&](double v) {
    const double target = lo + std::clamp(v, 0.0, 1.0) * (hi - lo);
    return std::clamp(curve.inverse(target), 0.0, 100.0);
  });
}

/// Voxel ink classes; the numeric values are the palette indices on disk.
enum class Ink : std::uint8_t { empty = 0, cyan = 1, magenta = 2, yellow = 3, black = 4, white = 5 };

inline constexpr double kMaxPrintHeightMm = 5.0;
inline constexpr int kGlossLayers = 6;

/// Colour and relief as a voxel stack: each planar pixel carries one colour voxel
/// at `layer_index` (1-based), white voxels at every layer below, nothing above.
struct ColorStack {
  Raster<int> layer_index;
  Raster<Ink> surface_ink;
  int layer_count = 0;
  double layer_thickness_um = 0.0;

  /// Palette bitmap of layer `layer` (1-based).
  Raster<std::uint8_t> layer_bitmap(int layer) const {
    Raster<std::uint8_t> out(layer_index.width(), layer_index.height(), 0);
    auto li = layer_index.pixels();
    auto ink = surface_ink.pixels();
    auto dst = out.pixels();
    for (std::size_t i = 0; i < li.size(); ++i) {
      if (layer < li[i]) dst[i] = static_cast<std::uint8_t>(Ink::white);
      else if (layer == li[i]) dst[i] = static_cast<std::uint8_t>(ink[i]);
    }
    return out;
  }
};

/// Simple subtractive separation: CMY complement with full black extraction,
/// paper (white) filling the remainder. Fractions sum to 1.
inline std::array<double, 5> ink_fractions(const Rgb& rgb) {
  const double c = 1.0 - std::clamp(rgb.r, 0.0, 1.0);
  const double m = 1.0 - std::clamp(rgb.g, 0.0, 1.0);
  const double y = 1.0 - std::clamp(rgb.b, 0.0, 1.0);
  const double k = std::min({c, m, y});
  std::array<double, 5> f{c - k, m - k, y - k, k, 0.0};
  const double sum = f[0] + f[1] + f[2] + f[3];
  if (sum > 1.0)
    for (int i = 0; i < 4; ++i) f[i] /= sum;
  f[4] = std::max(0.0, 1.0 - (f[0] + f[1] + f[2] + f[3]));
  return f;
}

/// Places every colour voxel in the layer matching its height; the surface ink is
/// chosen by vector error diffusion over the five ink fractions.
inline ColorStack slice(const ImageRgb& color, const HeightMap& height, double layer_thickness_um) {
  require_same_shape(color, height.values, "slice");
  if (!(layer_thickness_um > 0.0)) throw DomainError("layer thickness must be positive");
  if (color.empty()) throw DegenerateError("slice: empty raster");
  const auto [hmin, hmax] = min_max(height.values);
  if (hmin < 0.0) throw DomainError("slice: heights must be shifted to a non-negative base");
  if (hmax > kMaxPrintHeightMm + 1e-12)
    throw FabricationError("relief of " + std::to_string(hmax) +
                           " mm exceeds the printer limit of 5 mm; scale heights by " +
                           std::to_string(kMaxPrintHeightMm / hmax) + " or less");

  const int w = color.width(), h = color.height();
  ColorStack out{Raster<int>(w, h, 1), Raster<Ink>(w, h, Ink::white), 1, layer_thickness_um};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double rel_um = height.values(x, y) * 1000.0;
      const int idx = std::max(1, static_cast<int>(std::ceil(rel_um / layer_thickness_um - 1e-9)));
      out.layer_index(x, y) = idx;
      out.layer_count = std::max(out.layer_count, idx);
    }
  }

  // Floyd-Steinberg on the ink fraction vector: pick the ink with the largest
  // accumulated demand, diffuse the error of that choice.
  std::vector<std::array<double, 5>> err_cur(w + 2), err_next(w + 2);
  for (int y = 0; y < h; ++y) {
    std::fill(err_next.begin(), err_next.end(), std::array<double, 5>{});
    const bool rtl = (y % 2) == 1;
    for (int i = 0; i < w; ++i) {
      const int x = rtl ? w - 1 - i : i;
      const int dir = rtl ? -1 : 1;
      auto want = ink_fractions(color(x, y));
      for (int k = 0; k < 5; ++k) want[k] += err_cur[x + 1][k];
      const int pick = static_cast<int>(std::max_element(want.begin(), want.end()) - want.begin());
      std::array<double, 5> e = want;
      e[pick] -= 1.0;
      out.surface_ink(x, y) = static_cast<Ink>(pick + 1);
      for (int k = 0; k < 5; ++k) {
        const int xn = x + dir;
        if (xn >= 0 && xn < w) err_cur[xn + 1][k] += e[k] * 7.0 / 16.0;
        if (x - dir >= 0 && x - dir < w) err_next[x - dir + 1][k] += e[k] * 3.0 / 16.0;
        err_next[x + 1][k] += e[k] * 5.0 / 16.0;
        if (xn >= 0 && xn < w) err_next[xn + 1][k] += e[k] * 1.0 / 16.0;
      }
    }
    std::swap(err_cur, err_next);
  }
  return out;
}

/// Binary halftone of a coverage raster (values in [0, 1]) by serpentine
/// Floyd-Steinberg error diffusion. The threshold is jittered by a seeded uniform
/// term so layers generated with different seeds decorrelate.
inline Raster<std::uint8_t> error_diffuse(const ImageF& coverage, std::uint64_t seed,
                                          double threshold_jitter = 0.35) {
  const int w = coverage.width(), h = coverage.height();
  Raster<std::uint8_t> out(w, h, 0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-threshold_jitter, threshold_jitter);
  std::vector<double> cur(w + 2, 0.0), next(w + 2, 0.0);
  for (int y = 0; y < h; ++y) {
    std::fill(next.begin(), next.end(), 0.0);
    const bool rtl = (y % 2) == 1;
    const int dir = rtl ? -1 : 1;
    for (int i = 0; i < w; ++i) {
      const int x = rtl ? w - 1 - i : i;
      const double c = std::clamp(coverage(x, y), 0.0, 1.0);
      const double v = c + cur[x + 1];
      const double threshold = 0.5 + jitter(rng);
      // Fully empty and fully covered targets stay exact regardless of jitter.
      const bool on = c >= 1.0 ? true : c <= 0.0 ? false : v >= threshold;
      out(x, y) = on ? 1 : 0;
      const double e = v - (on ? 1.0 : 0.0);
      if (c <= 0.0 || c >= 1.0) continue;
      const int xn = x + dir, xp = x - dir;
      if (xn >= 0 && xn < w) cur[xn + 1] += e * 7.0 / 16.0;
      if (xp >= 0 && xp < w) next[xp + 1] += e * 3.0 / 16.0;
      next[x + 1] += e * 5.0 / 16.0;
      if (xn >= 0 && xn < w) next[xn + 1] += e * 1.0 / 16.0;
    }
    std::swap(cur, next);
  }
  return out;
}

/// Six transparent-ink layers: layer 1 is the full-coverage high-gloss flow
/// layer, layers 2-6 each carry matte coverage 1 - P/100.
inline std::array<Raster<std::uint8_t>, kGlossLayers> dither_gloss(const ImageF& print_values,
                                                                   std::uint64_t seed = 0) {
  for (double p : print_values.pixels())
    if (!(p >= 0.0 && p <= 100.0)) throw DomainError("print values must lie in [0, 100]");
  std::array<Raster<std::uint8_t>, kGlossLayers> layers;
  layers[0] = Raster<std::uint8_t>(print_values.width(), print_values.height(), 1);
  const ImageF coverage = map_raster(print_values, [](double p) { return 1.0 - p / 100.0; });
  for (int l = 1; l < kGlossLayers; ++l) {
    const std::uint64_t layer_seed = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(l) * 0xBF58476D1CE4E5B9ULL;
    layers[l] = error_diffuse(coverage, layer_seed);
  }
  return layers;
}

struct PrintJob {
  ColorStack color;
  std::array<Raster<std::uint8_t>, kGlossLayers> gloss_layers;
  ImageF print_values;
  double dpi = 450.0;
  double layer_thickness_um = 2.0;
};

inline PrintJob make_print_job(const ImageRgb& color, const HeightMap& height, const GlossMap& gloss,
                               const GlossResponseCurve& curve, double layer_thickness_um,
                               double dpi = 450.0, std::uint64_t seed = 0) {
  PrintJob job;
  HeightMap base = height;
  const double hmin = min_max(height.values).first;
  for (double& v : base.values.pixels()) v -= hmin;
  job.color = slice(color, base, layer_thickness_um);
  job.print_values = gloss_to_print(gloss, curve);
  job.gloss_layers = dither_gloss(job.print_values, seed);
  job.dpi = dpi;
  job.layer_thickness_um = layer_thickness_um;
  return job;
}

/// Default calibration used when no glossmeter CSV is given: a saturating
/// response from 8 GU (matte) to 85 GU (full gloss) over print values 0-100.
inline std::vector<GlossSample> default_gloss_samples() {
  std::vector<GlossSample> s;
  for (int i = 0; i <= 7; ++i) {
    const double p = 100.0 * i / 7.0;
    s.push_back({p, 8.0 + 77.0 * (1.0 - std::exp(-p / 35.0)) / (1.0 - std::exp(-100.0 / 35.0))});
  }
  return s;
}

}  // namespace glossforge
