#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "glossforge/errors.hpp"
#include "glossforge/raster.hpp"

namespace glossforge {

/// Scans brought back into the frame of the first one.
struct AlignedStack {
  std::vector<ImageF> maps;
  std::vector<Mask> masks;   ///< rotated and shifted with their maps (empty if none given)
  std::vector<Mask> valid;   ///< 0 where the residual shift left no data
  std::vector<PixelOffset> offsets;
};

struct ShiftSearch {
  PixelOffset offset;
  double ncc = 0.0;
};

/// Integer shift d maximising the normalized cross-correlation of ref(x, y)
/// against moving(x + dx, y + dy) over |dx|, |dy| <= window. Ties go to the
/// smaller shift.
inline ShiftSearch best_shift(const ImageF& ref, const ImageF& moving, int window) {
  require_same_shape(ref, moving, "best_shift");
  const int w = ref.width(), h = ref.height();
  ShiftSearch best{{0, 0}, -std::numeric_limits<double>::infinity()};
  for (int dy = -window; dy <= window; ++dy) {
    for (int dx = -window; dx <= window; ++dx) {
      const int x0 = std::max(0, -dx), x1 = std::min(w, w - dx);
      const int y0 = std::max(0, -dy), y1 = std::min(h, h - dy);
      if (x1 - x0 < 2 || y1 - y0 < 2) continue;
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x) {
          const double a = ref(x, y), b = moving(x + dx, y + dy);
          sa += a; sb += b; saa += a * a; sbb += b * b; sab += a * b;
        }
      const double n = static_cast<double>(x1 - x0) * (y1 - y0);
      const double va = saa - sa * sa / n, vb = sbb - sb * sb / n;
      const double ncc = (va > 0 && vb > 0) ? (sab - sa * sb / n) / std::sqrt(va * vb) : 0.0;
      const int mag = std::abs(dx) + std::abs(dy);
      const int best_mag = std::abs(best.offset.dx) + std::abs(best.offset.dy);
      if (ncc > best.ncc + 1e-12 || (std::abs(ncc - best.ncc) <= 1e-12 && mag < best_mag))
        best = {{dx, dy}, ncc};
    }
  }
  return best;
}

template <typename T>
Raster<T> shift_raster(const Raster<T>& in, PixelOffset d, T fill, Mask* valid = nullptr) {
  Raster<T> out(in.width(), in.height(), fill);
  if (valid) *valid = Mask(in.width(), in.height(), 0);
  for (int y = 0; y < in.height(); ++y)
    for (int x = 0; x < in.width(); ++x)
      if (in.contains(x + d.dx, y + d.dy)) {
        out(x, y) = in(x + d.dx, y + d.dy);
        if (valid) (*valid)(x, y) = 1;
      }
  return out;
}

/// `maps[i]` was scanned with the painting turned counter-clockwise by
/// quarter_turns[i] * 90 degrees. Each is turned back; with search_window > 0
/// the remaining integer offset against maps[0] is found by exhaustive NCC.
inline AlignedStack align_rotations(const std::vector<ImageF>& maps, const std::vector<int>& quarter_turns,
                                    const std::vector<Mask>& masks = {}, int search_window = 8) {
  if (maps.empty() || maps.size() != quarter_turns.size())
    throw DomainError("align_rotations: one rotation per map required");
  if (!masks.empty() && masks.size() != maps.size())
    throw DomainError("align_rotations: one mask per map required");
  AlignedStack out;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const int back = ((4 - quarter_turns[i] % 4) % 4 + 4) % 4;
    ImageF m = rotate_ccw(maps[i], back);
    Mask mk = masks.empty() ? Mask() : rotate_ccw(masks[i], back);
    if (i > 0 && !m.same_shape(out.maps[0]))
      throw ShapeMismatch("align_rotations: scan " + std::to_string(i) + " does not match the reference frame");
    PixelOffset d{0, 0};
    if (i > 0 && search_window > 0) d = best_shift(out.maps[0], m, search_window).offset;
    Mask valid;
    out.maps.push_back(shift_raster(m, d, 0.0, &valid));
    if (!masks.empty()) out.masks.push_back(shift_raster<std::uint8_t>(mk, d, 1));
    out.valid.push_back(std::move(valid));
    out.offsets.push_back(d);
  }
  return out;
}

/// Summary of a set of differences (percent of the maximum possible difference).
struct RegionStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  ///< sample standard deviation
  // Of the absolute differences, for box plots.
  double abs_mean = 0.0;
  double abs_std = 0.0;
  double abs_q1 = 0.0;
  double abs_median = 0.0;
  double abs_q3 = 0.0;
};

struct Histogram {
  double lo = -40.0;
  double hi = 40.0;
  double bin_width = 1.0;
  std::vector<std::size_t> counts;

  std::size_t total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }
};

struct ConsistencyReport {
  double mean = 0.0;
  double std = 0.0;
  double laplace_mu = 0.0;  ///< median
  double laplace_b = 0.0;   ///< mean absolute deviation from the median
  RegionStats all;
  RegionStats masked;
  RegionStats unmasked;
  Histogram histogram;
};

namespace detail {

/// Linear-interpolated quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& s, double q) {
  if (s.empty()) return 0.0;
  const double pos = q * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  const std::size_t j = std::min(i + 1, s.size() - 1);
  return s[i] + (pos - static_cast<double>(i)) * (s[j] - s[i]);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile_sorted(v, 0.5);
}

inline RegionStats region_stats(const std::vector<double>& d) {
  RegionStats r;
  r.count = d.size();
  if (d.empty()) return r;
  const double n = static_cast<double>(d.size());
  std::vector<double> a(d.size());
  double s = 0.0, sa = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    s += d[i];
    a[i] = std::abs(d[i]);
    sa += a[i];
  }
  r.mean = s / n;
  r.abs_mean = sa / n;
  double v = 0.0, va = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    v += (d[i] - r.mean) * (d[i] - r.mean);
    va += (a[i] - r.abs_mean) * (a[i] - r.abs_mean);
  }
  r.std = d.size() > 1 ? std::sqrt(v / (n - 1)) : 0.0;
  r.abs_std = d.size() > 1 ? std::sqrt(va / (n - 1)) : 0.0;
  std::sort(a.begin(), a.end());
  r.abs_q1 = quantile_sorted(a, 0.25);
  r.abs_median = quantile_sorted(a, 0.5);
  r.abs_q3 = quantile_sorted(a, 0.75);
  return r;
}

}  // namespace detail

/// Maximum-likelihood Laplace fit: location is the median, scale the mean
/// absolute deviation from it.
inline std::pair<double, double> fit_laplace(const std::vector<double>& d) {
  if (d.empty()) throw DegenerateError("fit_laplace: no samples");
  const double mu = detail::median(d);
  double b = 0.0;
  for (double v : d) b += std::abs(v - mu);
  return {mu, b / static_cast<double>(d.size())};
}

inline Histogram difference_histogram(const std::vector<double>& d, double lo = -40.0, double hi = 40.0,
                                      double bin_width = 1.0) {
  Histogram hgram{lo, hi, bin_width, {}};
  const auto bins = static_cast<std::size_t>(std::lround((hi - lo) / bin_width));
  hgram.counts.assign(bins, 0);
  for (double v : d) {
    if (v < lo || v > hi) continue;
    auto i = static_cast<std::size_t>(std::floor((v - lo) / bin_width));
    hgram.counts[std::min(i, bins - 1)]++;
  }
  return hgram;
}

/// Statistics of a - b after mapping both through the joint scale [lo, hi],
/// in percent of the maximum possible difference. The masked region is the
/// union of both masks; `valid` (optional) excludes pixels without data.
inline ConsistencyReport difference_stats(const ImageF& a, const ImageF& b, const Mask& mask_a,
                                          const Mask& mask_b, double lo, double hi,
                                          const Mask* valid = nullptr) {
  require_same_shape(a, b, "difference_stats");
  require_same_shape(a, mask_a, "difference_stats");
  require_same_shape(a, mask_b, "difference_stats");
  if (valid) require_same_shape(a, *valid, "difference_stats");
  if (!(lo < hi)) throw DegenerateError("difference_stats: empty joint range");
  const double scale = 100.0 / (hi - lo);
  std::vector<double> all, masked, unmasked;
  all.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (valid && !valid->pixels()[i]) continue;
    // Subtracting before scaling keeps stats(a,b) and stats(b,a) exact negatives.
    const double d = (a.pixels()[i] - b.pixels()[i]) * scale;
    all.push_back(d);
    (mask_a.pixels()[i] || mask_b.pixels()[i] ? masked : unmasked).push_back(d);
  }
  if (unmasked.empty()) throw DegenerateError("difference_stats: no unmasked pixels to compare");
  ConsistencyReport r;
  r.all = detail::region_stats(all);
  r.masked = detail::region_stats(masked);
  r.unmasked = detail::region_stats(unmasked);
  r.mean = r.all.mean;
  r.std = r.all.std;
  std::tie(r.laplace_mu, r.laplace_b) = fit_laplace(all);
  r.histogram = difference_histogram(all);
  return r;
}

}  // namespace glossforge
