#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "glossforge/errors.hpp"
#include "glossforge/gloss.hpp"
#include "glossforge/masking.hpp"
#include "glossforge/raster.hpp"

namespace glossforge {

struct GridPos {
  int row = 0;
  int col = 0;

  bool operator==(const GridPos&) const = default;
};

/// One capture: colour, relief and gloss share a pixel grid.
struct Tile {
  ImageRgb color;
  HeightMap height;
  GlossMap gloss;
  GridPos grid_pos;
  PixelOffset nominal_offset;  ///< top-left corner in mosaic pixels, from the scan plan

  void validate() const {
    require_same_shape(color, height.values, "tile");
    require_same_shape(color, gloss.values, "tile");
    if (color.empty()) throw DegenerateError("tile is empty");
  }
};

/// z = a*x + b*y + c, with x, y in pixels.
struct Plane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;

  double operator()(double x, double y) const noexcept { return a * x + b * y + c; }
  /// Same plane expressed in coordinates shifted by (dx, dy): p'(x, y) = p(x + dx, y + dy).
  Plane shifted(double dx, double dy) const noexcept { return {a, b, c + a * dx + b * dy}; }
  Plane operator+(const Plane& o) const noexcept { return {a + o.a, b + o.b, c + o.c}; }
  Plane operator-(const Plane& o) const noexcept { return {a - o.a, b - o.b, c - o.c}; }
};

namespace detail {

/// Accumulates least-squares sums for z ~ a*x + b*y + c around a reference point.
class PlaneAccumulator {
 public:
  PlaneAccumulator(double x0, double y0) : x0_(x0), y0_(y0) {}

  void add(double x, double y, double z) noexcept {
    const double u = x - x0_, v = y - y0_;
    n_ += 1.0;
    su_ += u; sv_ += v; sz_ += z;
    suu_ += u * u; svv_ += v * v; suv_ += u * v;
    suz_ += u * z; svz_ += v * z; szz_ += z * z;
  }

  double count() const noexcept { return n_; }

  std::optional<Plane> solve() const {
    // Normal equations [suu suv su; suv svv sv; su sv n] [a b c'] = [suz svz sz].
    const double m[3][3] = {{suu_, suv_, su_}, {suv_, svv_, sv_}, {su_, sv_, n_}};
    const double r[3] = {suz_, svz_, sz_};
    const double det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
                       m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
                       m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    const double scale = std::max({std::abs(suu_ * svv_ * n_), 1e-300});
    if (n_ < 3.0 || std::abs(det) <= 1e-12 * scale) return std::nullopt;
    auto cramer = [&](int col) {
      double t[3][3];
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) t[i][j] = (j == col) ? r[i] : m[i][j];
      return (t[0][0] * (t[1][1] * t[2][2] - t[1][2] * t[2][1]) -
              t[0][1] * (t[1][0] * t[2][2] - t[1][2] * t[2][0]) +
              t[0][2] * (t[1][0] * t[2][1] - t[1][1] * t[2][0])) /
             det;
    };
    const double a = cramer(0), b = cramer(1), c = cramer(2);
    return Plane{a, b, c - a * x0_ - b * y0_};
  }

  /// Sum of squared residuals of the best plane, sum(z^2) - beta^T X^T z.
  double residual(const Plane& p) const noexcept {
    const double c0 = p(x0_, y0_);
    return std::max(0.0, szz_ - (p.a * suz_ + p.b * svz_ + c0 * sz_));
  }

 private:
  double x0_, y0_;
  double n_ = 0, su_ = 0, sv_ = 0, sz_ = 0, suu_ = 0, svv_ = 0, suv_ = 0, suz_ = 0, svz_ = 0,
         szz_ = 0;
};

}  // namespace detail

/// Least-squares plane through the raster (pixels where `valid` is set, if given).
inline Plane fit_plane(const ImageF& h, const Mask* valid = nullptr) {
  detail::PlaneAccumulator acc(h.width() / 2.0, h.height() / 2.0);
  for (int y = 0; y < h.height(); ++y)
    for (int x = 0; x < h.width(); ++x)
      if (!valid || (*valid)(x, y)) acc.add(x, y, h(x, y));
  auto p = acc.solve();
  if (!p) throw DegenerateError("fit_plane: fewer than 3 non-collinear samples");
  return *p;
}

inline Plane fit_plane(const HeightMap& h) { return fit_plane(h.values); }

inline ImageF subtract_plane(const ImageF& h, const Plane& p) {
  ImageF out = h;
  for (int y = 0; y < h.height(); ++y)
    for (int x = 0; x < h.width(); ++x) out(x, y) -= p(x, y);
  return out;
}

struct StitchParams {
  double color_weight = 0.5;
  double height_weight = 0.5;
  double blend_sigma = 16.0;  ///< px, low/high frequency split
  int search_window = 12;     ///< px around the nominal relative offset
  double min_overlap_fraction = 0.10;
  /// Cost landscape counts as flat when (median - min) < ratio * median.
  double flat_cost_ratio = 0.25;
};

struct Registration {
  PixelOffset offset;  ///< b's origin in a's pixel coordinates
  double cost = 0.0;
  bool flat_cost = false;
};

namespace detail {

struct OverlapRect {
  int x0, y0, x1, y1;  // in a's coordinates, half-open
  long long area() const { return static_cast<long long>(std::max(0, x1 - x0)) * std::max(0, y1 - y0); }
};

inline OverlapRect overlap_rect(int wa, int ha, int wb, int hb, PixelOffset off) {
  return {std::max(0, off.dx), std::max(0, off.dy), std::min(wa, off.dx + wb),
          std::min(ha, off.dy + hb)};
}

/// SSD normalized by overlap size and mean channel variance.
inline double nssd(const ImageF& a, const ImageF& b, const OverlapRect& r, PixelOffset off) {
  double sa = 0, sb = 0, saa = 0, sbb = 0, ssd = 0;
  for (int y = r.y0; y < r.y1; ++y) {
    for (int x = r.x0; x < r.x1; ++x) {
      const double va = a(x, y), vb = b(x - off.dx, y - off.dy);
      sa += va; sb += vb; saa += va * va; sbb += vb * vb;
      ssd += (va - vb) * (va - vb);
    }
  }
  const double n = static_cast<double>(r.area());
  const double var = 0.5 * (saa / n - (sa / n) * (sa / n) + sbb / n - (sb / n) * (sb / n));
  return ssd / (n * (std::max(var, 0.0) + 1e-12));
}

/// Like nssd but on the height difference after removing its best-fit plane, so a
/// relative tilt or offset between the two captures does not bias the match.
inline double height_nssd(const ImageF& a, const ImageF& b, const OverlapRect& r, PixelOffset off) {
  PlaneAccumulator acc((r.x0 + r.x1) / 2.0, (r.y0 + r.y1) / 2.0);
  double sa = 0, sb = 0, saa = 0, sbb = 0;
  for (int y = r.y0; y < r.y1; ++y) {
    for (int x = r.x0; x < r.x1; ++x) {
      const double va = a(x, y), vb = b(x - off.dx, y - off.dy);
      sa += va; sb += vb; saa += va * va; sbb += vb * vb;
      acc.add(x, y, va - vb);
    }
  }
  const double n = static_cast<double>(r.area());
  const double var = 0.5 * (saa / n - (sa / n) * (sa / n) + sbb / n - (sb / n) * (sb / n));
  const auto plane = acc.solve();
  const double ssr = plane ? acc.residual(*plane) : 0.0;
  return ssr / (n * (std::max(var, 0.0) + 1e-12));
}

}  // namespace detail

/// Exhaustive integer search for b's placement relative to a within
/// +-search_window of the nominal relative offset.
inline Registration register_pair(const Tile& a, const Tile& b, int search_window,
                                  const StitchParams& params = {}) {
  a.validate();
  b.validate();
  const PixelOffset nominal{b.nominal_offset.dx - a.nominal_offset.dx,
                            b.nominal_offset.dy - a.nominal_offset.dy};
  const int wa = a.color.width(), ha = a.color.height();
  const int wb = b.color.width(), hb = b.color.height();
  const double tile_area = static_cast<double>(std::min<long long>(
      static_cast<long long>(wa) * ha, static_cast<long long>(wb) * hb));
  const long long min_area =
      static_cast<long long>(std::ceil(params.min_overlap_fraction * tile_area));
  if (detail::overlap_rect(wa, ha, wb, hb, nominal).area() < std::max(min_area, 1LL))
    throw RegistrationError("insufficient overlap at the nominal offset");

  const ImageF la = hsl_lightness(a.color);
  const ImageF lb = hsl_lightness(b.color);

  struct Candidate {
    PixelOffset off;
    double cost;
  };
  std::vector<Candidate> cands;
  for (int dy = -search_window; dy <= search_window; ++dy) {
    for (int dx = -search_window; dx <= search_window; ++dx) {
      const PixelOffset off{nominal.dx + dx, nominal.dy + dy};
      const auto r = detail::overlap_rect(wa, ha, wb, hb, off);
      if (r.area() < std::max(min_area, 3LL)) continue;
      const double cost =
          params.color_weight * detail::nssd(la, lb, r, off) +
          params.height_weight * detail::height_nssd(a.height.values, b.height.values, r, off);
      cands.push_back({off, cost});
    }
  }
  if (cands.empty()) throw RegistrationError("no candidate offset with sufficient overlap");

  auto distance2 = [&](PixelOffset o) {
    const long long ex = o.dx - nominal.dx, ey = o.dy - nominal.dy;
    return ex * ex + ey * ey;
  };
  double best_cost = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) best_cost = std::min(best_cost, c.cost);
  const double tie = 1e-12 * std::max(1.0, std::abs(best_cost));
  const Candidate* best = nullptr;
  for (const auto& c : cands) {
    if (c.cost > best_cost + tie) continue;
    if (!best || distance2(c.off) < distance2(best->off)) best = &c;
  }

  std::vector<double> costs;
  costs.reserve(cands.size());
  for (const auto& c : cands) costs.push_back(c.cost);
  std::nth_element(costs.begin(), costs.begin() + costs.size() / 2, costs.end());
  const double median = costs[costs.size() / 2];
  const bool flat = !(median - best_cost >= params.flat_cost_ratio * median);
  if (flat) {
    const auto r = detail::overlap_rect(wa, ha, wb, hb, nominal);
    const double nominal_cost =
        params.color_weight * detail::nssd(la, lb, r, nominal) +
        params.height_weight * detail::height_nssd(a.height.values, b.height.values, r, nominal);
    return Registration{nominal, nominal_cost, true};
  }
  return Registration{best->off, best->cost, false};
}

/// Height correction for a raster placed at `offset` over a reference: the
/// best-fit plane of (b - a) over the overlap, in b's pixel coordinates.
/// Subtracting it from b matches the overlap means and removes residual slope.
struct HeightAlignment {
  Plane correction;
  double shift = 0.0;  ///< vertical shift applied to b: -mean(b - a) over the overlap
  double overlap_rms_after = 0.0;
};

inline HeightAlignment align_height(const ImageF& a, const Mask* a_valid, const ImageF& b,
                                    const Mask* b_valid, PixelOffset offset) {
  detail::PlaneAccumulator acc(b.width() / 2.0, b.height() / 2.0);
  double sum = 0.0;
  for (int y = 0; y < b.height(); ++y) {
    const int ay = y + offset.dy;
    if (ay < 0 || ay >= a.height()) continue;
    for (int x = 0; x < b.width(); ++x) {
      const int ax = x + offset.dx;
      if (ax < 0 || ax >= a.width()) continue;
      if (a_valid && !(*a_valid)(ax, ay)) continue;
      if (b_valid && !(*b_valid)(x, y)) continue;
      const double d = b(x, y) - a(ax, ay);
      acc.add(x, y, d);
      sum += d;
    }
  }
  const auto plane = acc.solve();
  if (!plane) throw DegenerateError("align_height: overlap too small or collinear");
  HeightAlignment out;
  out.correction = *plane;
  out.shift = -sum / acc.count();
  out.overlap_rms_after = std::sqrt(acc.residual(*plane) / acc.count());
  return out;
}

inline HeightAlignment align_height(const HeightMap& a, const HeightMap& b, PixelOffset offset) {
  return align_height(a.values, nullptr, b.values, nullptr, offset);
}

namespace detail {

inline std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double s = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    s += k[i + radius];
  }
  for (double& v : k) v /= s;
  return k;
}

/// Gaussian low-pass of `v` restricted to pixels where `m` is set (normalized
/// convolution); other pixels are left at 0.
inline ImageF masked_blur(const ImageF& v, const Mask& m, double sigma) {
  const int w = v.width(), h = v.height();
  if (sigma <= 0.0) {
    ImageF out(w, h, 0.0);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (m(x, y)) out(x, y) = v(x, y);
    return out;
  }
  const auto k = gaussian_kernel(sigma);
  const int r = static_cast<int>(k.size() / 2);
  ImageF num(w, h, 0.0), den(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sn = 0.0, sd = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int xx = x + i;
        if (xx < 0 || xx >= w || !m(xx, y)) continue;
        sn += k[i + r] * v(xx, y);
        sd += k[i + r];
      }
      num(x, y) = sn;
      den(x, y) = sd;
    }
  }
  ImageF out(w, h, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!m(x, y)) continue;
      double sn = 0.0, sd = 0.0;
      for (int i = -r; i <= r; ++i) {
        const int yy = y + i;
        if (yy < 0 || yy >= h) continue;
        sn += k[i + r] * num(x, yy);
        sd += k[i + r] * den(x, yy);
      }
      out(x, y) = sd > 0.0 ? sn / sd : v(x, y);
    }
  }
  return out;
}

}  // namespace detail

enum class SeamAxis { horizontal_join, vertical_join };

/// Raster under construction in mosaic coordinates plus its coverage.
template <typename T>
struct Canvas {
  Raster<T> data;
  Mask valid;

  Canvas() = default;
  Canvas(int w, int h) : data(w, h), valid(w, h, 0) {}
};

struct Point2 {
  double x = 0.0, y = 0.0;
};

/// Merges `b`, placed with its origin at `offset`, into the canvas. Inside the
/// overlap the low-frequency bands (Gaussian, sigma px) are cross-faded linearly
/// along the seam axis; the high-frequency band comes from whichever side has the
/// nearer centre. Outside the overlap b is copied.
inline void blend(Canvas<double>& canvas, const ImageF& b, const Mask* b_valid, PixelOffset offset,
                  SeamAxis axis, double sigma, Point2 canvas_centre, Point2 b_centre) {
  const int W = canvas.data.width(), H = canvas.data.height();
  const int x0 = std::max(0, offset.dx), y0 = std::max(0, offset.dy);
  const int x1 = std::min(W, offset.dx + b.width()), y1 = std::min(H, offset.dy + b.height());
  if (x0 >= x1 || y0 >= y1) return;
  const int bw = x1 - x0, bh = y1 - y0;

  // Overlap within the window.
  Mask ov(bw, bh, 0);
  ImageF va(bw, bh, 0.0), vb(bw, bh, 0.0);
  bool any_overlap = false;
  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      const int cx = x + x0, cy = y + y0;
      const int bx = cx - offset.dx, by = cy - offset.dy;
      const bool in_b = !b_valid || (*b_valid)(bx, by);
      vb(x, y) = b(bx, by);
      va(x, y) = canvas.data(cx, cy);
      if (in_b && canvas.valid(cx, cy)) {
        ov(x, y) = 1;
        any_overlap = true;
      }
    }
  }

  ImageF la, lb;
  if (any_overlap) {
    la = detail::masked_blur(va, ov, sigma);
    lb = detail::masked_blur(vb, ov, sigma);
  }

  // Cross-fade weight of b along the seam axis, per line of the overlap.
  const bool along_x = axis == SeamAxis::horizontal_join;
  const bool b_after = along_x ? b_centre.x >= canvas_centre.x : b_centre.y >= canvas_centre.y;
  ImageF weight(bw, bh, 0.0);
  if (any_overlap) {
    const int lines = along_x ? bh : bw;
    const int len = along_x ? bw : bh;
    for (int l = 0; l < lines; ++l) {
      int first = -1, last = -1;
      for (int t = 0; t < len; ++t) {
        const int x = along_x ? t : l, y = along_x ? l : t;
        if (ov(x, y)) {
          if (first < 0) first = t;
          last = t;
        }
      }
      if (first < 0) continue;
      for (int t = first; t <= last; ++t) {
        const int x = along_x ? t : l, y = along_x ? l : t;
        const double s = last > first ? static_cast<double>(t - first) / (last - first) : 0.5;
        weight(x, y) = b_after ? s : 1.0 - s;
      }
    }
  }

  for (int y = 0; y < bh; ++y) {
    for (int x = 0; x < bw; ++x) {
      const int cx = x + x0, cy = y + y0;
      const int bx = cx - offset.dx, by = cy - offset.dy;
      if (b_valid && !(*b_valid)(bx, by)) continue;
      if (!ov(x, y)) {
        if (!canvas.valid(cx, cy)) {
          canvas.data(cx, cy) = vb(x, y);
          canvas.valid(cx, cy) = 1;
        }
        continue;
      }
      const double w = weight(x, y);
      const double low = (1.0 - w) * la(x, y) + w * lb(x, y);
      const double da = std::hypot(cx - canvas_centre.x, cy - canvas_centre.y);
      const double db = std::hypot(cx - b_centre.x, cy - b_centre.y);
      const double high = db < da ? vb(x, y) - lb(x, y) : va(x, y) - la(x, y);
      canvas.data(cx, cy) = low + high;
    }
  }
}

/// Per-channel blend of an RGB raster.
inline void blend(Canvas<Rgb>& canvas, const ImageRgb& b, const Mask* b_valid, PixelOffset offset,
                  SeamAxis axis, double sigma, Point2 canvas_centre, Point2 b_centre) {
  const int W = canvas.data.width(), H = canvas.data.height();
  for (int ch = 0; ch < 3; ++ch) {
    auto get = [ch](const Rgb& p) { return ch == 0 ? p.r : ch == 1 ? p.g : p.b; };
    Canvas<double> c;
    c.data = map_raster(canvas.data, get);
    c.valid = canvas.valid;
    const ImageF bc = map_raster(b, get);
    blend(c, bc, b_valid, offset, axis, sigma, canvas_centre, b_centre);
    for (int y = 0; y < H; ++y) {
      for (int x = 0; x < W; ++x) {
        double& dst = ch == 0 ? canvas.data(x, y).r : ch == 1 ? canvas.data(x, y).g : canvas.data(x, y).b;
        dst = c.data(x, y);
      }
    }
    if (ch == 2) canvas.valid = c.valid;
  }
}

/// Convenience two-raster merge on the union of both footprints. Returns the
/// merged raster in a's coordinates extended to cover b; `offset` places b.
inline Canvas<double> blend(const ImageF& a, const ImageF& b, PixelOffset offset, SeamAxis axis,
                            double sigma = 16.0) {
  const int ox = std::min(0, offset.dx), oy = std::min(0, offset.dy);
  const int W = std::max(a.width(), offset.dx + b.width()) - ox;
  const int H = std::max(a.height(), offset.dy + b.height()) - oy;
  Canvas<double> c(W, H);
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      c.data(x - ox, y - oy) = a(x, y);
      c.valid(x - ox, y - oy) = 1;
    }
  const Point2 ca{a.width() / 2.0 - ox, a.height() / 2.0 - oy};
  const Point2 cb{offset.dx - ox + b.width() / 2.0, offset.dy - oy + b.height() / 2.0};
  blend(c, b, nullptr, {offset.dx - ox, offset.dy - oy}, axis, sigma, ca, cb);
  return c;
}

struct TileTransform {
  GridPos grid_pos;
  PixelOffset position;  ///< top-left in mosaic pixels
  Plane height_correction;  ///< subtracted from the tile height, tile pixel coordinates
};

struct PairRegistration {
  GridPos a;
  GridPos b;
  Registration result;
};

struct Mosaic {
  ImageRgb color;
  HeightMap height;
  GlossMap gloss;
  Mask coverage;
  std::vector<TileTransform> transforms;
  std::vector<PairRegistration> registrations;
  double seam_max_gradient = 0.0;    ///< max |forward height difference| inside overlaps, mm/px
  double tile_max_gradient = 0.0;    ///< same, inside corrected tiles
};

namespace detail {

inline double max_forward_gradient(const ImageF& h, const Mask* region, const Mask* valid) {
  double best = 0.0;
  for (int y = 0; y < h.height(); ++y) {
    for (int x = 0; x < h.width(); ++x) {
      if (region && !(*region)(x, y)) continue;
      if (valid && !(*valid)(x, y)) continue;
      if (x + 1 < h.width() && (!valid || (*valid)(x + 1, y)))
        best = std::max(best, std::abs(h(x + 1, y) - h(x, y)));
      if (y + 1 < h.height() && (!valid || (*valid)(x, y + 1)))
        best = std::max(best, std::abs(h(x, y + 1) - h(x, y)));
    }
  }
  return best;
}

inline void apply_plane(ImageF& h, const Plane& p) {
  for (int y = 0; y < h.height(); ++y)
    for (int x = 0; x < h.width(); ++x) h(x, y) -= p(x, y);
}

}  // namespace detail

/// Stitches a rectangular grid (tiles[row][col]) into one mosaic: every tile's
/// relief is first levelled onto the best-fit plane of the centre tile, tiles are
/// registered and merged along each row, then the rows are merged top to bottom.
inline Mosaic stitch(const std::vector<std::vector<Tile>>& tiles, const StitchParams& params = {}) {
  const int rows = static_cast<int>(tiles.size());
  if (rows == 0) throw DegenerateError("stitch: empty grid");
  const int cols = static_cast<int>(tiles.front().size());
  if (cols == 0) throw DegenerateError("stitch: empty grid");
  for (const auto& row : tiles)
    if (static_cast<int>(row.size()) != cols) throw DomainError("stitch: grid is not rectangular");
  for (const auto& row : tiles)
    for (const auto& t : row) t.validate();
  const double pitch = tiles[0][0].height.pixel_pitch_um;

  // Level every tile onto the centre tile's plane.
  const Tile& centre = tiles[rows / 2][cols / 2];
  const Plane centre_plane = fit_plane(centre.height.values);
  std::vector<std::vector<Tile>> work = tiles;
  std::vector<std::vector<Plane>> corrections(rows, std::vector<Plane>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Plane own = fit_plane(work[r][c].height.values);
      corrections[r][c] = own - centre_plane;
      detail::apply_plane(work[r][c].height.values, corrections[r][c]);
    }
  }

  Mosaic mosaic;
  auto label = [](int r, int c) {
    return "tile (" + std::to_string(r) + ", " + std::to_string(c) + ")";
  };
  auto reg = [&](int r0, int c0, int r1, int c1) {
    try {
      auto res = register_pair(work[r0][c0], work[r1][c1], params.search_window, params);
      mosaic.registrations.push_back({{r0, c0}, {r1, c1}, res});
      return res;
    } catch (const Error& e) {
      throw RegistrationError(label(r0, c0) + " -> " + label(r1, c1) + ": " + e.what());
    }
  };

  // Row-local placements.
  std::vector<std::vector<PixelOffset>> local(rows, std::vector<PixelOffset>(cols));
  for (int r = 0; r < rows; ++r)
    for (int c = 1; c < cols; ++c) {
      const auto res = reg(r, c - 1, r, c);
      local[r][c] = {local[r][c - 1].dx + res.offset.dx, local[r][c - 1].dy + res.offset.dy};
    }

  // Row origins from the vertical neighbours; the lowest-cost column decides.
  std::vector<PixelOffset> row_origin(rows);
  for (int r = 1; r < rows; ++r) {
    std::optional<PixelOffset> chosen;
    double chosen_cost = std::numeric_limits<double>::infinity();
    bool chosen_flat = true;
    for (int c = 0; c < cols; ++c) {
      const auto res = reg(r - 1, c, r, c);
      const PixelOffset origin{row_origin[r - 1].dx + local[r - 1][c].dx + res.offset.dx - local[r][c].dx,
                               row_origin[r - 1].dy + local[r - 1][c].dy + res.offset.dy - local[r][c].dy};
      const bool better = (!res.flat_cost && chosen_flat) ||
                          (res.flat_cost == chosen_flat && res.cost < chosen_cost);
      if (!chosen || better) {
        chosen = origin;
        chosen_cost = res.cost;
        chosen_flat = res.flat_cost;
      }
    }
    row_origin[r] = *chosen;
  }

  // Global placement, shifted so the bounding box starts at 0.
  std::vector<std::vector<PixelOffset>> pos(rows, std::vector<PixelOffset>(cols));
  int minx = std::numeric_limits<int>::max(), miny = minx;
  int maxx = std::numeric_limits<int>::min(), maxy = maxx;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      pos[r][c] = {row_origin[r].dx + local[r][c].dx, row_origin[r].dy + local[r][c].dy};
      minx = std::min(minx, pos[r][c].dx);
      miny = std::min(miny, pos[r][c].dy);
      maxx = std::max(maxx, pos[r][c].dx + work[r][c].color.width());
      maxy = std::max(maxy, pos[r][c].dy + work[r][c].color.height());
    }
  for (auto& row : pos)
    for (auto& p : row) p = {p.dx - minx, p.dy - miny};
  const int W = maxx - minx, H = maxy - miny;

  Canvas<Rgb> color(W, H);
  Canvas<double> height(W, H), gloss(W, H);
  Mask seam_region(W, H, 0);
  double tile_grad = 0.0;
  double row_centre_prev_y = 0.0;

  for (int r = 0; r < rows; ++r) {
    Canvas<Rgb> rc(W, H);
    Canvas<double> rh(W, H), rg(W, H);
    for (int c = 0; c < cols; ++c) {
      Tile& t = work[r][c];
      const PixelOffset p = pos[r][c];
      const Point2 bc{p.dx + t.color.width() / 2.0, p.dy + t.color.height() / 2.0};
      if (c > 0) {
        const auto al = align_height(rh.data, &rh.valid, t.height.values, nullptr, p);
        detail::apply_plane(t.height.values, al.correction);
        corrections[r][c] = corrections[r][c] + al.correction;
        for (int y = 0; y < t.color.height(); ++y)
          for (int x = 0; x < t.color.width(); ++x)
            if (rh.valid(x + p.dx, y + p.dy)) seam_region(x + p.dx, y + p.dy) = 1;
      }
      const PixelOffset prev = c > 0 ? pos[r][c - 1] : p;
      const Tile& pt = work[r][c > 0 ? c - 1 : c];
      const Point2 ac{prev.dx + pt.color.width() / 2.0, prev.dy + pt.color.height() / 2.0};
      blend(rc, t.color, nullptr, p, SeamAxis::horizontal_join, params.blend_sigma, ac, bc);
      blend(rh, t.height.values, nullptr, p, SeamAxis::horizontal_join, params.blend_sigma, ac, bc);
      blend(rg, t.gloss.values, nullptr, p, SeamAxis::horizontal_join, params.blend_sigma, ac, bc);
    }

    // Row strip centre along y.
    double row_top = H, row_bottom = 0;
    for (int c = 0; c < cols; ++c) {
      row_top = std::min<double>(row_top, pos[r][c].dy);
      row_bottom = std::max<double>(row_bottom, pos[r][c].dy + work[r][c].color.height());
    }
    const double row_centre_y = 0.5 * (row_top + row_bottom);

    if (r > 0) {
      const auto al = align_height(height.data, &height.valid, rh.data, &rh.valid, {0, 0});
      detail::apply_plane(rh.data, al.correction);
      for (int c = 0; c < cols; ++c)
        corrections[r][c] = corrections[r][c] + al.correction.shifted(pos[r][c].dx, pos[r][c].dy);
      for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
          if (rh.valid(x, y) && height.valid(x, y)) seam_region(x, y) = 1;
    }
    const Point2 ac{W / 2.0, row_centre_prev_y};
    const Point2 bc{W / 2.0, row_centre_y};
    blend(color, rc.data, &rc.valid, {0, 0}, SeamAxis::vertical_join, params.blend_sigma, ac, bc);
    blend(height, rh.data, &rh.valid, {0, 0}, SeamAxis::vertical_join, params.blend_sigma, ac, bc);
    blend(gloss, rg.data, &rg.valid, {0, 0}, SeamAxis::vertical_join, params.blend_sigma, ac, bc);
    row_centre_prev_y = row_centre_y;
  }

  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      mosaic.transforms.push_back({{r, c}, pos[r][c], corrections[r][c]});
      ImageF corrected = tiles[r][c].height.values;
      detail::apply_plane(corrected, corrections[r][c]);
      tile_grad = std::max(tile_grad, detail::max_forward_gradient(corrected, nullptr, nullptr));
    }

  mosaic.color = std::move(color.data);
  mosaic.height = HeightMap{std::move(height.data), pitch};
  mosaic.gloss.values = std::move(gloss.data);
  mosaic.gloss.normalized = tiles[0][0].gloss.normalized;
  mosaic.gloss.scale_min = tiles[0][0].gloss.scale_min;
  mosaic.gloss.scale_max = tiles[0][0].gloss.scale_max;
  mosaic.coverage = std::move(height.valid);
  mosaic.seam_max_gradient =
      detail::max_forward_gradient(mosaic.height.values, &seam_region, &mosaic.coverage);
  mosaic.tile_max_gradient = tile_grad;
  return mosaic;
}

}  // namespace glossforge
