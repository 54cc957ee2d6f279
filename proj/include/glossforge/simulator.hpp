#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "glossforge/errors.hpp"
#include "glossforge/geometry.hpp"
#include "glossforge/gloss.hpp"
#include "glossforge/masking.hpp"
#include "glossforge/optics.hpp"
#include "glossforge/raster.hpp"
#include "glossforge/stitching.hpp"

namespace glossforge {

namespace rng {

/// splitmix64; used instead of <random> distributions so scenes are bit-identical
/// across standard library implementations.
constexpr std::uint64_t mix(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash(std::uint64_t a, std::uint64_t b) noexcept {
  return mix(a ^ mix(b + 0x632BE59BD9B4E019ULL));
}

/// Uniform in [0, 1).
constexpr double unit(std::uint64_t h) noexcept {
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() noexcept { return mix(state_++ * 0xD1B54A32D192ED03ULL + 1); }
  double uniform() noexcept { return unit(next()); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  /// Standard normal via Box-Muller.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace rng

/// Smooth value noise in [-1, 1]: seeded lattice values with smoothstep
/// interpolation, summed over octaves with halving amplitude.
inline double value_noise(double x, double y, double scale, int octaves, std::uint64_t seed) {
  double sum = 0.0, amp = 1.0, norm = 0.0, freq = 1.0 / std::max(scale, 1e-9);
  for (int o = 0; o < std::max(octaves, 1); ++o) {
    const double fx = x * freq, fy = y * freq;
    const double ix = std::floor(fx), iy = std::floor(fy);
    const double tx = fx - ix, ty = fy - iy;
    const double sx = tx * tx * (3 - 2 * tx), sy = ty * ty * (3 - 2 * ty);
    auto lattice = [&](double cx, double cy) {
      const auto ux = static_cast<std::uint64_t>(static_cast<std::int64_t>(cx));
      const auto uy = static_cast<std::uint64_t>(static_cast<std::int64_t>(cy));
      return 2.0 * rng::unit(rng::hash(rng::hash(seed + o, ux), uy)) - 1.0;
    };
    const double v00 = lattice(ix, iy), v10 = lattice(ix + 1, iy);
    const double v01 = lattice(ix, iy + 1), v11 = lattice(ix + 1, iy + 1);
    const double v = (v00 * (1 - sx) + v10 * sx) * (1 - sy) + (v01 * (1 - sx) + v11 * sx) * sy;
    sum += amp * v;
    norm += amp;
    amp *= 0.5;
    freq *= 2.0;
  }
  return sum / norm;
}

// Height primitives (added together, mm).
struct ConstantHeight { double value_mm = 0.0; };
/// Inclined plane through the raster centre; azimuth 0 rises toward +x.
struct RampHeight { double slope_deg = 0.0; double azimuth_deg = 0.0; };
/// Adds dh for every pixel at or beyond `position_px` along the axis.
struct StepHeight { double position_px = 0.0; bool along_x = true; double dh_mm = 0.5; };
struct PlateauHeight { int x0 = 0, y0 = 0, x1 = 0, y1 = 0; double dh_mm = 0.2; };
struct BumpsHeight { int count = 10; double amplitude_mm = 0.05; double sigma_px = 20.0; };
struct TextureHeight { double amplitude_mm = 0.01; double scale_px = 32.0; int octaves = 3; };
using HeightPrimitive = std::variant<ConstantHeight, RampHeight, StepHeight, PlateauHeight,
                                     BumpsHeight, TextureHeight>;

// Specular magnitude primitives, applied in order.
struct ConstantGloss { double value = 0.3; };
struct DiskGloss { double cx = 0, cy = 0, radius = 10; double value = 0.6; };
struct StripesGloss { double period_px = 64; double width_px = 16; double angle_deg = 0; double value = 0.6; };
struct TextureGloss { double amplitude = 0.05; double scale_px = 32.0; int octaves = 2; };
using GlossPrimitive = std::variant<ConstantGloss, DiskGloss, StripesGloss, TextureGloss>;

struct AlbedoSpec {
  Rgb base{0.55, 0.4, 0.25};
  double texture_amplitude = 0.1;
  double scale_px = 24.0;
  int octaves = 3;
};

struct SceneSpec {
  int width = 256;
  int height = 128;
  double pixel_pitch_um = 703.125;
  std::uint64_t seed = 1;
  std::vector<HeightPrimitive> height_layers;
  std::vector<GlossPrimitive> gloss_layers{ConstantGloss{}};
  AlbedoSpec albedo{};
  ScannerConfig scanner{};
};

/// Ground truth the physical scanner would otherwise provide.
struct SyntheticScene {
  HeightMap height;
  ImageRgb rho_d;
  ImageF rho_s;
  OpticalMedium media;
  ScannerConfig config;  ///< footprint matches the raster

  void validate() const {
    require_same_shape(height.values, rho_d, "scene");
    require_same_shape(height.values, rho_s, "scene");
    for (double v : rho_s.pixels())
      if (!std::isfinite(v)) throw DomainError("scene rho_s must be finite");
  }
};

inline SyntheticScene make_scene(const SceneSpec& spec) {
  if (spec.width < 1 || spec.height < 1) throw DomainError("scene must be at least 1x1");
  if (!(spec.pixel_pitch_um > 0.0)) throw DomainError("scene pixel pitch must be positive");
  const int w = spec.width, h = spec.height;
  const double pitch_mm = spec.pixel_pitch_um / 1000.0;
  SyntheticScene s;
  s.height = HeightMap{ImageF(w, h, 0.0), spec.pixel_pitch_um};
  s.rho_d = ImageRgb(w, h);
  s.rho_s = ImageF(w, h, 0.0);
  s.media = spec.scanner.media;
  s.config = spec.scanner.with_footprint(w, h, spec.pixel_pitch_um);

  std::uint64_t layer = 0;
  for (const auto& prim : spec.height_layers) {
    const std::uint64_t seed = rng::hash(spec.seed, 1000 + layer++);
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          auto& v = s.height.values;
          if constexpr (std::is_same_v<T, ConstantHeight>) {
            for (double& z : v.pixels()) z += p.value_mm;
          } else if constexpr (std::is_same_v<T, RampHeight>) {
            const double g = std::tan(deg_to_rad(p.slope_deg));
            const double ca = std::cos(deg_to_rad(p.azimuth_deg)), sa = std::sin(deg_to_rad(p.azimuth_deg));
            for (int y = 0; y < h; ++y)
              for (int x = 0; x < w; ++x)
                v(x, y) += g * pitch_mm * ((x - w / 2) * ca + (y - h / 2) * sa);
          } else if constexpr (std::is_same_v<T, StepHeight>) {
            for (int y = 0; y < h; ++y)
              for (int x = 0; x < w; ++x)
                if ((p.along_x ? x : y) >= p.position_px) v(x, y) += p.dh_mm;
          } else if constexpr (std::is_same_v<T, PlateauHeight>) {
            for (int y = std::max(0, p.y0); y < std::min(h, p.y1); ++y)
              for (int x = std::max(0, p.x0); x < std::min(w, p.x1); ++x) v(x, y) += p.dh_mm;
          } else if constexpr (std::is_same_v<T, BumpsHeight>) {
            rng::Stream st(seed);
            for (int i = 0; i < p.count; ++i) {
              const double cx = st.uniform(0, w), cy = st.uniform(0, h);
              const double amp = p.amplitude_mm * st.uniform(0.5, 1.0);
              const int r = static_cast<int>(std::ceil(4 * p.sigma_px));
              for (int y = std::max(0, static_cast<int>(cy) - r); y < std::min(h, static_cast<int>(cy) + r + 1); ++y)
                for (int x = std::max(0, static_cast<int>(cx) - r); x < std::min(w, static_cast<int>(cx) + r + 1); ++x) {
                  const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
                  v(x, y) += amp * std::exp(-0.5 * d2 / (p.sigma_px * p.sigma_px));
                }
            }
          } else if constexpr (std::is_same_v<T, TextureHeight>) {
            for (int y = 0; y < h; ++y)
              for (int x = 0; x < w; ++x) v(x, y) += p.amplitude_mm * value_noise(x, y, p.scale_px, p.octaves, seed);
          }
        },
        prim);
  }

  for (const auto& prim : spec.gloss_layers) {
    const std::uint64_t seed = rng::hash(spec.seed, 2000 + layer++);
    std::visit(
        [&](const auto& p) {
          using T = std::decay_t<decltype(p)>;
          auto& v = s.rho_s;
          if constexpr (std::is_same_v<T, ConstantGloss>) {
            v.fill(p.value);
          } else if constexpr (std::is_same_v<T, DiskGloss>) {
            for (int y = 0; y < h; ++y)
              for (int x = 0; x < w; ++x)
                if ((x - p.cx) * (x - p.cx) + (y - p.cy) * (y - p.cy) <= p.radius * p.radius) v(x, y) = p.value;
          } else if constexpr (std::is_same_v<T, StripesGloss>) {
            const double ca = std::cos(deg_to_rad(p.angle_deg)), sa = std::sin(deg_to_rad(p.angle_deg));
            for (int y = 0; y < h; ++y)
              for (int x = 0; x < w; ++x) {
                const double t = x * ca + y * sa;
                const double phase = t - p.period_px * std::floor(t / p.period_px);
                if (phase < p.width_px) v(x, y) = p.value;
              }
          } else if constexpr (std::is_same_v<T, TextureGloss>) {
            for (int y = 0; y < h; ++y)
              for (int x = 0; x < w; ++x)
                v(x, y) = std::max(0.0, v(x, y) + p.amplitude * value_noise(x, y, p.scale_px, p.octaves, seed));
          }
        },
        prim);
  }

  const auto& a = spec.albedo;
  const std::uint64_t aseed = rng::hash(spec.seed, 3000);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      auto tex = [&](std::uint64_t ch) {
        return a.texture_amplitude * value_noise(x, y, a.scale_px, a.octaves, aseed + ch);
      };
      s.rho_d(x, y) = {std::clamp(a.base.r + tex(0), 0.0, 1.0), std::clamp(a.base.g + tex(1), 0.0, 1.0),
                       std::clamp(a.base.b + tex(2), 0.0, 1.0)};
    }
  return s;
}

struct RenderOptions {
  double lobe_deg = 8.0;      ///< off-specular roughness lobe width
  double noise_sigma = 0.0;             ///< additive Gaussian sensor noise per channel
  std::uint64_t noise_seed = 0;
  bool shadows = true;
};

/// Upper bound of a rendered sample; anything beyond is clamped and counted.
inline constexpr double kMaxIntensity = 1.5;

struct RenderTruth {
  ImageF rho_s;
  ImageF specular;   ///< total specular energy S per pixel
  ImageF i1_specular;
  ImageF i2_specular;
  Mask shadow;
  ImageF lobe;
  GeometryMaps geometry;
};

struct RenderResult {
  PolarizedPair pair;
  RenderTruth truth;
  std::size_t clamped = 0;  ///< channel samples clamped into [0, kMaxIntensity]
};

/// Polarized capture pair of a scene. The specular energy at each pixel is
///   S = rho_s * e(J) * (Rs + Rp)(theta_j) / (Rs - Rp)(theta_mount) * visibility * lobe,
/// which makes the correction applied by correct_gloss its exact inverse: the
/// polarized difference S (Rs - Rp)/(Rs + Rp) corrected by f/e returns rho_s.
inline RenderResult render_pair(const SyntheticScene& scene, const RenderOptions& opt = {}) {
  scene.validate();
  const int w = scene.rho_s.width(), h = scene.rho_s.height();
  const ScannerConfig& cfg = scene.config;
  RenderResult out;
  out.truth.geometry = geometry_maps(cfg, w, h);
  const auto corr = correction_maps(out.truth.geometry, cfg);
  const double pol_centre = polarized_reflectance(cfg.theta_mount, cfg.media);

  out.truth.shadow = (opt.shadows && w >= 2) ? shadow_mask(scene.height, cfg.theta_mount,
                                                           LightAzimuth::from_positive_x)
                                             : Mask(w, h, 0);
  out.truth.lobe = ImageF(w, h, 1.0);
  if (w >= 2 && h >= 2) {
    const ImageF tilt = surface_tilt(scene.height);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double r = tilt(x, y) / deg_to_rad(opt.lobe_deg);
        out.truth.lobe(x, y) = std::exp(-r * r);
      }
  }

  out.truth.rho_s = scene.rho_s;
  out.truth.specular = ImageF(w, h);
  out.truth.i1_specular = ImageF(w, h);
  out.truth.i2_specular = ImageF(w, h);
  out.pair.i1 = ImageRgb(w, h);
  out.pair.i2 = ImageRgb(w, h);
  rng::Stream noise(rng::hash(opt.noise_seed, 0x5EED));

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto c = fresnel(out.truth.geometry.theta(x, y), cfg.media);
      const double vis = out.truth.shadow(x, y) ? 0.0 : 1.0;
      const double s = scene.rho_s(x, y) * corr.e_map(x, y) * (c.rs + c.rp) / pol_centre * vis *
                       out.truth.lobe(x, y);
      const double s1 = s * c.rs / (c.rs + c.rp);
      const double s2 = s * c.rp / (c.rs + c.rp);
      out.truth.specular(x, y) = s;
      out.truth.i1_specular(x, y) = s1;
      out.truth.i2_specular(x, y) = s2;
      const Rgb d = scene.rho_d(x, y);
      Rgb a{0.5 * d.r + s1, 0.5 * d.g + s1, 0.5 * d.b + s1};
      Rgb b{0.5 * d.r + s2, 0.5 * d.g + s2, 0.5 * d.b + s2};
      for (double* v : {&a.r, &a.g, &a.b, &b.r, &b.g, &b.b}) {
        if (opt.noise_sigma > 0.0) *v += opt.noise_sigma * noise.normal();
        if (*v < 0.0 || *v > kMaxIntensity) {
          *v = std::clamp(*v, 0.0, kMaxIntensity);
          ++out.clamped;
        }
      }
      out.pair.i1(x, y) = a;
      out.pair.i2(x, y) = b;
    }
  }
  return out;
}

/// Where one capture of a grid scan sits on the master raster.
struct TilePlacement {
  GridPos grid_pos;
  PixelOffset nominal;  ///< from the scan plan
  PixelOffset actual;   ///< where the tile was really cut (nominal + jitter)
  int width = 0;
  int height = 0;
};

/// Lays out a rows x cols grid with the given fractional overlap over a
/// width x height master. With jitter > 0 each tile is displaced by a seeded
/// integer offset in [-jitter, jitter]; a margin of `jitter` px is reserved.
inline std::vector<TilePlacement> plan_tiles(int width, int height, int rows, int cols, double overlap,
                                             int jitter = 0, std::uint64_t seed = 0) {
  if (rows < 1 || cols < 1) throw DomainError("grid must be at least 1x1");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw DomainError("overlap must lie in [0, 1)");
  if (jitter < 0) throw DomainError("jitter must be non-negative");
  const int uw = width - 2 * jitter, uh = height - 2 * jitter;
  auto tile_len = [overlap](int usable, int n) {
    if (n == 1) return usable;
    return static_cast<int>(std::ceil(usable / (n - (n - 1) * overlap) - 1e-9));
  };
  const int tw = tile_len(uw, cols), th = tile_len(uh, rows);
  if (tw < 2 || th < 2 || tw > uw || th > uh)
    throw DomainError("grid overflow: " + std::to_string(rows) + "x" + std::to_string(cols) +
                      " tiles do not fit a " + std::to_string(width) + "x" + std::to_string(height) + " raster");
  auto start = [](int usable, int len, int n, int i) {
    return n == 1 ? 0 : static_cast<int>(std::lround(static_cast<double>(i) * (usable - len) / (n - 1)));
  };
  rng::Stream st(rng::hash(seed, 0x711E5));
  std::vector<TilePlacement> out;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      TilePlacement p;
      p.grid_pos = {r, c};
      p.nominal = {jitter + start(uw, tw, cols, c), jitter + start(uh, th, rows, r)};
      p.actual = p.nominal;
      if (jitter > 0) {
        p.actual.dx += static_cast<int>(st.next() % static_cast<std::uint64_t>(2 * jitter + 1)) - jitter;
        p.actual.dy += static_cast<int>(st.next() % static_cast<std::uint64_t>(2 * jitter + 1)) - jitter;
      }
      p.width = tw;
      p.height = th;
      out.push_back(p);
    }
  return out;
}

template <typename T>
Raster<T> cut_tile(const Raster<T>& master, const TilePlacement& p) {
  return crop(master, p.actual.dx, p.actual.dy, p.width, p.height);
}

/// Sub-scene covered by one capture; its scanner footprint is the tile itself.
inline SyntheticScene cut_scene(const SyntheticScene& scene, const TilePlacement& p) {
  SyntheticScene s;
  s.height = HeightMap{cut_tile(scene.height.values, p), scene.height.pixel_pitch_um};
  s.rho_d = cut_tile(scene.rho_d, p);
  s.rho_s = cut_tile(scene.rho_s, p);
  s.media = scene.media;
  s.config = scene.config.with_footprint(p.width, p.height, scene.height.pixel_pitch_um);
  return s;
}

/// The scene as seen after rotating the painting counter-clockwise by
/// quarter_turns * 90 degrees under the scanner.
inline SyntheticScene rotate_scene(const SyntheticScene& scene, int quarter_turns) {
  SyntheticScene s;
  s.height = HeightMap{rotate_ccw(scene.height.values, quarter_turns), scene.height.pixel_pitch_um};
  s.rho_d = rotate_ccw(scene.rho_d, quarter_turns);
  s.rho_s = rotate_ccw(scene.rho_s, quarter_turns);
  s.media = scene.media;
  s.config = scene.config.with_footprint(s.rho_s.width(), s.rho_s.height(), scene.height.pixel_pitch_um);
  return s;
}

}  // namespace glossforge
