#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "glossforge/errors.hpp"
#include "glossforge/gloss.hpp"
#include "glossforge/optics.hpp"
#include "glossforge/raster.hpp"

namespace glossforge {

/// Relief of a tile or mosaic in millimetres.
struct HeightMap {
  ImageF values;
  double pixel_pitch_um = 25.0;

  double pitch_mm() const noexcept { return pixel_pitch_um / 1000.0; }
};

struct MaskSet {
  Mask normal_mask;
  Mask shadow_mask;
  Mask combined;
};

/// Direction the light arrives from, in raster coordinates. The scanner lamp
/// sits on the +x side of every tile.
enum class LightAzimuth { from_positive_x, from_negative_x, from_positive_y, from_negative_y };

/// Angle (radians) between the local surface normal and the global normal, from
/// central differences (one-sided at the borders).
inline ImageF surface_tilt(const HeightMap& h) {
  const auto& v = h.values;
  const int w = v.width();
  const int ht = v.height();
  if (w < 2 || ht < 2) throw DomainError("surface_tilt needs at least 2x2 pixels");
  const double p = h.pitch_mm();
  ImageF tilt(w, ht);
  for (int y = 0; y < ht; ++y) {
    const int y0 = std::max(0, y - 1), y1 = std::min(ht - 1, y + 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - 1), x1 = std::min(w - 1, x + 1);
      const double gx = (v(x1, y) - v(x0, y)) / ((x1 - x0) * p);
      const double gy = (v(x, y1) - v(x, y0)) / ((y1 - y0) * p);
      tilt(x, y) = std::atan(std::hypot(gx, gy));
    }
  }
  return tilt;
}

/// Pixels whose local normal deviates from the global normal by more than
/// `threshold` radians.
inline Mask normal_mask(const HeightMap& h, double threshold = deg_to_rad(10.0)) {
  if (h.values.width() < 3 || h.values.height() < 3)
    throw DomainError("normal_mask needs at least 3x3 pixels");
  const ImageF tilt = surface_tilt(h);
  return map_raster(tilt, [threshold](double t) -> std::uint8_t { return t > threshold ? 1 : 0; });
}

/// Cast shadows of the relief under a collimated light at `incidence` from the
/// normal. Scans each line away from the light keeping the running horizon.
inline Mask shadow_mask(const HeightMap& h, double incidence = std::atan(1.495),
                        LightAzimuth azimuth = LightAzimuth::from_positive_x) {
  const auto& v = h.values;
  const int w = v.width();
  const int ht = v.height();
  const bool lateral =
      azimuth == LightAzimuth::from_positive_x || azimuth == LightAzimuth::from_negative_x;
  if (w * ht < 2 || (lateral ? w : ht) < 2) throw DomainError("shadow_mask needs a line of at least 2 pixels");
  if (!(incidence > 0.0 && incidence < kPi / 2.0))
    throw DomainError("shadow_mask: incidence must lie in (0, pi/2)");

  constexpr double kTolerance = 1e-9;  // mm
  const double drop_per_px = h.pitch_mm() / std::tan(incidence);
  Mask out(w, ht, 0);
  const int lines = lateral ? ht : w;
  const int length = lateral ? w : ht;
  for (int line = 0; line < lines; ++line) {
    double horizon = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < length; ++t) {
      int x = 0, y = 0;
      switch (azimuth) {
        case LightAzimuth::from_positive_x: x = w - 1 - t; y = line; break;
        case LightAzimuth::from_negative_x: x = t; y = line; break;
        case LightAzimuth::from_positive_y: x = line; y = ht - 1 - t; break;
        case LightAzimuth::from_negative_y: x = line; y = t; break;
      }
      // Occluded iff some earlier K has h(K) - h(J) > dist(K, J) / tan(incidence).
      const double level = v(x, y) + t * drop_per_px;
      if (horizon > level + kTolerance) out(x, y) = 1;
      horizon = std::max(horizon, level);
    }
  }
  return out;
}

inline MaskSet combine_masks(Mask normal, Mask shadow) {
  require_same_shape(normal, shadow, "combine_masks");
  Mask combined(normal.width(), normal.height());
  auto a = normal.pixels();
  auto b = shadow.pixels();
  auto c = combined.pixels();
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = (a[i] || b[i]) ? 1 : 0;
  return MaskSet{std::move(normal), std::move(shadow), std::move(combined)};
}

struct MaskParams {
  double normal_threshold = deg_to_rad(10.0);
  double incidence = std::atan(1.495);
  LightAzimuth azimuth = LightAzimuth::from_positive_x;
};

inline MaskSet build_masks(const HeightMap& h, const MaskParams& params = {}) {
  return combine_masks(normal_mask(h, params.normal_threshold),
                       shadow_mask(h, params.incidence, params.azimuth));
}

/// Fractions of the surface covered, in percent.
struct MaskStats {
  double normal_pct = 0.0;
  double shadow_pct = 0.0;
  double both_pct = 0.0;
};

inline MaskStats mask_stats(const MaskSet& masks) {
  const auto a = masks.normal_mask.pixels();
  const auto b = masks.shadow_mask.pixels();
  std::size_t na = 0, nb = 0, nab = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    na += a[i] ? 1 : 0;
    nb += b[i] ? 1 : 0;
    nab += (a[i] && b[i]) ? 1 : 0;
  }
  const double n = a.empty() ? 1.0 : static_cast<double>(a.size());
  return {100.0 * na / n, 100.0 * nb / n, 100.0 * nab / n};
}

/// Replaces every masked pixel by the maximum unmasked value within a Euclidean
/// disk of `radius` pixels. Where the disk holds no unmasked pixel the radius is
/// doubled until one is found. A fully masked map is returned unchanged.
inline GlossMap infill(const GlossMap& gloss, const Mask& mask, int radius = 40) {
  require_same_shape(gloss.values, mask, "infill");
  if (radius < 1) throw DomainError("infill radius must be positive");
  GlossMap out = gloss;
  const int w = mask.width();
  const int h = mask.height();
  const std::size_t masked = count_set(mask);
  if (masked == 0 || masked == mask.size()) return out;

  const long long max_r2 = static_cast<long long>(w) * w + static_cast<long long>(h) * h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask(x, y)) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (long long r = radius;; r *= 2) {
        const long long r2 = r * r;
        const int ri = static_cast<int>(std::min<long long>(r, w + h));
        for (int dy = -ri; dy <= ri; ++dy) {
          const int yy = y + dy;
          if (yy < 0 || yy >= h) continue;
          const long long rem = r2 - static_cast<long long>(dy) * dy;
          long long dxmax = static_cast<long long>(std::sqrt(static_cast<double>(rem)));
          while (dxmax * dxmax > rem) --dxmax;
          while ((dxmax + 1) * (dxmax + 1) <= rem) ++dxmax;
          const int xa = static_cast<int>(std::max<long long>(0, x - dxmax));
          const int xb = static_cast<int>(std::min<long long>(w - 1, x + dxmax));
          for (int xx = xa; xx <= xb; ++xx)
            if (!mask(xx, yy)) best = std::max(best, gloss.values(xx, yy));
        }
        if (best > -std::numeric_limits<double>::infinity() || r2 > max_r2) break;
      }
      out.values(x, y) = best;
    }
  }
  return out;
}

inline GlossMap infill(const GlossMap& gloss, const MaskSet& masks, int radius = 40) {
  return infill(gloss, masks.combined, radius);
}

}  // namespace glossforge
