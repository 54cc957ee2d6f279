#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "glossforge/errors.hpp"
#include "glossforge/geometry.hpp"
#include "glossforge/optics.hpp"
#include "glossforge/raster.hpp"

namespace glossforge {

/// Two linear RGB captures of the same tile: i1 with the analyser passing the
/// specular (s) polarization, i2 with the analyser rotated by 90 degrees.
struct PolarizedPair {
  ImageRgb i1;
  ImageRgb i2;

  void validate() const {
    require_same_shape(i1, i2, "polarized pair");
    for (const auto* img : {&i1, &i2})
      for (const Rgb& p : img->pixels())
        if (!std::isfinite(p.r) || !std::isfinite(p.g) || !std::isfinite(p.b) || p.r < 0.0 ||
            p.g < 0.0 || p.b < 0.0)
          throw DomainError("polarized pair contains negative or non-finite values");
  }
};

struct GlossMap {
  ImageF values;
  double scale_min = 0.0;
  double scale_max = 0.0;
  bool normalized = false;
};

/// Path-length (e) and Fresnel (f) scaling factors relative to the tile centre.
struct CorrectionMaps {
  ImageF e_map;
  ImageF f_map;
};

/// HSL lightness, (max + min) / 2 of the three channels.
inline double lightness(const Rgb& p) noexcept {
  return (std::max({p.r, p.g, p.b}) + std::min({p.r, p.g, p.b})) / 2.0;
}

inline ImageF hsl_lightness(const ImageRgb& img) {
  return map_raster(img, [](const Rgb& p) { return lightness(p); });
}

/// Divides out illumination non-uniformity recorded on a white reference.
inline ImageRgb flat_field(const ImageRgb& img, const ImageRgb& white_ref) {
  constexpr double kEpsilon = 1e-6;
  require_same_shape(img, white_ref, "flat_field");
  if (white_ref.empty()) throw DegenerateError("flat_field: empty reference");
  double sr = 0.0, sg = 0.0, sb = 0.0;
  for (const Rgb& w : white_ref.pixels()) {
    if (w.r <= kEpsilon || w.g <= kEpsilon || w.b <= kEpsilon)
      throw DegenerateError("flat_field: white reference has a non-positive pixel");
    sr += w.r;
    sg += w.g;
    sb += w.b;
  }
  const double n = static_cast<double>(white_ref.size());
  const Rgb ref_mean{sr / n, sg / n, sb / n};
  ImageRgb out(img.width(), img.height());
  auto src = img.pixels();
  auto ref = white_ref.pixels();
  auto dst = out.pixels();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = {std::max(0.0, src[i].r * ref_mean.r / ref[i].r),
              std::max(0.0, src[i].g * ref_mean.g / ref[i].g),
              std::max(0.0, src[i].b * ref_mean.b / ref[i].b)};
  }
  return out;
}

/// Difference of the lightness of the two captures. The diffuse part is
/// unpolarized and cancels; negative differences are sensor noise and clamp to 0.
inline GlossMap raw_gloss(const PolarizedPair& pair) {
  require_same_shape(pair.i1, pair.i2, "raw_gloss");
  GlossMap out;
  out.values = ImageF(pair.i1.width(), pair.i1.height());
  auto a = pair.i1.pixels();
  auto b = pair.i2.pixels();
  auto dst = out.values.pixels();
  for (std::size_t i = 0; i < a.size(); ++i)
    dst[i] = std::max(0.0, lightness(a[i]) - lightness(b[i]));
  return out;
}

inline CorrectionMaps correction_maps(const GeometryMaps& geom, const ScannerConfig& cfg) {
  require_same_shape(geom.theta, geom.path_length, "correction_maps");
  const double centre_path = cfg.lamp_distance_mm + cfg.camera_distance_mm;
  const double centre_pol = polarized_reflectance(cfg.theta_mount, cfg.media);
  CorrectionMaps out{ImageF(geom.theta.width(), geom.theta.height()),
                     ImageF(geom.theta.width(), geom.theta.height())};
  for (int y = 0; y < geom.theta.height(); ++y) {
    for (int x = 0; x < geom.theta.width(); ++x) {
      const double pol = polarized_reflectance(geom.theta(x, y), cfg.media);
      if (!(pol > 0.0))
        throw DegenerateError("correction_maps: Rs - Rp vanishes at a pixel");
      const double ratio = centre_path / geom.path_length(x, y);
      out.e_map(x, y) = ratio * ratio;
      out.f_map(x, y) = centre_pol / pol;
    }
  }
  return out;
}

/// Brings every pixel to its centre-equivalent value: multiplies by the Fresnel
/// factor f and divides by the inverse-square factor e.
inline GlossMap correct_gloss(const GlossMap& raw, const CorrectionMaps& corr) {
  require_same_shape(raw.values, corr.e_map, "correct_gloss");
  require_same_shape(raw.values, corr.f_map, "correct_gloss");
  if (raw.normalized) throw DomainError("correct_gloss expects an unnormalized map");
  GlossMap out = raw;
  auto v = out.values.pixels();
  auto e = corr.e_map.pixels();
  auto f = corr.f_map.pixels();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = v[i] * f[i] / e[i];
  return out;
}

/// Min and max over a set of maps; used so every tile (or scan) shares one scale.
inline std::pair<double, double> joint_range(std::span<const GlossMap> maps) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& m : maps) {
    auto [a, b] = min_max(m.values);
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  return {lo, hi};
}

inline GlossMap normalize_gloss(const GlossMap& map, double global_min, double global_max) {
  if (!(global_min < global_max)) throw DegenerateError("normalize_gloss: empty range");
  GlossMap out = map;
  const double span = global_max - global_min;
  for (double& v : out.values.pixels()) v = std::clamp((v - global_min) / span, 0.0, 1.0);
  out.scale_min = global_min;
  out.scale_max = global_max;
  out.normalized = true;
  return out;
}

/// Convenience chain for one tile: difference, then off-centre correction.
inline GlossMap extract_gloss(const PolarizedPair& pair, const ScannerConfig& cfg) {
  pair.validate();
  const auto geom = geometry_maps(cfg, pair.i1.width(), pair.i1.height());
  return correct_gloss(raw_gloss(pair), correction_maps(geom, cfg));
}

}  // namespace glossforge
