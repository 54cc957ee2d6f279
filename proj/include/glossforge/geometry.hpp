#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "glossforge/errors.hpp"
#include "glossforge/optics.hpp"
#include "glossforge/raster.hpp"

namespace glossforge {

/// Mounting geometry of the gloss module. Lamp and camera sit on opposite sides
/// of the tile centre B in the lateral (x) plane, both tilted by theta_mount from
/// the surface normal. The camera looks from the -x side (edge A), the lamp shines
/// from the +x side (edge C).
struct ScannerConfig {
  /// Brewster's angle of the average paint index (1.495), nominally 56.3 degrees.
  double theta_mount = std::atan(1.495);
  double lamp_distance_mm = 450.0;    ///< k: tile centre to lamp plane
  double camera_distance_mm = 450.0;  ///< m: tile centre to camera optical centre
  double tile_width_mm = 180.0;       ///< lateral extent, A to C
  double tile_height_mm = 90.0;
  double pixel_pitch_um = 25.0;
  /// Lamp panel extent; 0 means unbounded.
  double lamp_width_mm = 0.0;
  double lamp_height_mm = 0.0;
  OpticalMedium media{};

  void validate() const {
    media.validate();
    if (!(theta_mount > 0.0 && theta_mount < kPi / 2.0))
      throw DomainError("theta_mount must lie in (0, pi/2)");
    if (!(lamp_distance_mm > 0.0) || !(camera_distance_mm > 0.0) ||
        !(tile_width_mm > 0.0) || !(tile_height_mm > 0.0) || !(pixel_pitch_um > 0.0))
      throw DomainError("scanner distances must be positive");
    if (lamp_width_mm < 0.0 || lamp_height_mm < 0.0)
      throw DomainError("lamp extent must be non-negative");
  }

  int raster_width() const {
    return static_cast<int>(std::lround(tile_width_mm * 1000.0 / pixel_pitch_um));
  }
  int raster_height() const {
    return static_cast<int>(std::lround(tile_height_mm * 1000.0 / pixel_pitch_um));
  }

  /// Same mount, footprint resized to cover width x height pixels at `pitch_um`.
  ScannerConfig with_footprint(int width, int height, double pitch_um) const {
    ScannerConfig c = *this;
    c.pixel_pitch_um = pitch_um;
    c.tile_width_mm = width * pitch_um / 1000.0;
    c.tile_height_mm = height * pitch_um / 1000.0;
    return c;
  }

  bool operator==(const ScannerConfig&) const = default;
};

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  friend Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  double dot(Vec3 o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
};

/// Per-pixel mirror angle and lamp-to-camera path length of one tile.
struct GeometryMaps {
  ImageF theta;        ///< radians
  ImageF path_length;  ///< k_j + m_j in mm
};

/// Pixel index that coincides with the tile centre B.
constexpr int centre_index(int n) noexcept { return n / 2; }

/// Surface coordinate (mm) of pixel column/row i on an n-pixel axis spanning `extent_mm`.
inline double pixel_coordinate_mm(int i, int n, double extent_mm) {
  return (static_cast<double>(i) - centre_index(n)) * extent_mm / n;
}

/// The full specular path through a surface point, built with the mirrored
/// (virtual) lamp plane below the painting.
struct MirrorPath {
  Vec3 surface;        ///< J
  Vec3 camera;         ///< O
  Vec3 virtual_lamp;   ///< where ray O->J meets the mirrored lamp plane
  Vec3 lamp;           ///< real lamp point (mirror of virtual_lamp)
  double theta = 0.0;  ///< angle between surface normal and J->O
  double path_length = 0.0;
};

inline MirrorPath trace_mirror_path(const ScannerConfig& cfg, double x_mm, double y_mm) {
  const double st = std::sin(cfg.theta_mount);
  const double ct = std::cos(cfg.theta_mount);
  const double m = cfg.camera_distance_mm;
  const double k = cfg.lamp_distance_mm;

  MirrorPath p;
  p.surface = {x_mm, y_mm, 0.0};
  p.camera = {-m * st, 0.0, m * ct};

  const Vec3 to_camera = p.camera - p.surface;
  p.theta = std::acos(std::clamp(to_camera.z / to_camera.norm(), -1.0, 1.0));

  // Mirrored lamp plane: normal (sin, 0, -cos), passing through k * normal.
  const Vec3 normal{st, 0.0, -ct};
  const Vec3 dir = (1.0 / to_camera.norm()) * (p.surface - p.camera);
  const double denom = normal.dot(dir);
  if (!(denom > 1e-12))
    throw GeometryError("mirror ray does not reach the lamp plane");
  const double t = (k - normal.dot(p.camera)) / denom;
  if (!(t > 0.0)) throw GeometryError("lamp plane lies behind the camera");
  p.virtual_lamp = p.camera + t * dir;
  p.lamp = {p.virtual_lamp.x, p.virtual_lamp.y, -p.virtual_lamp.z};
  p.path_length = t;

  if (cfg.lamp_width_mm > 0.0 || cfg.lamp_height_mm > 0.0) {
    const Vec3 centre = k * normal;
    const Vec3 d = p.virtual_lamp - centre;
    const Vec3 u{ct, 0.0, st};  // in-plane lateral axis
    const bool outside_w = cfg.lamp_width_mm > 0.0 && std::abs(d.dot(u)) > cfg.lamp_width_mm / 2;
    const bool outside_h = cfg.lamp_height_mm > 0.0 && std::abs(d.y) > cfg.lamp_height_mm / 2;
    if (outside_w || outside_h)
      throw GeometryError("lamp panel too small to contain the mirror point of (" +
                          std::to_string(x_mm) + ", " + std::to_string(y_mm) + ") mm");
  }
  return p;
}

inline GeometryMaps geometry_maps(const ScannerConfig& cfg, int width_px, int height_px) {
  cfg.validate();
  if (width_px < 1 || height_px < 1) throw DomainError("raster must be at least 1x1");
  GeometryMaps maps{ImageF(width_px, height_px), ImageF(width_px, height_px)};
  for (int y = 0; y < height_px; ++y) {
    const double ym = pixel_coordinate_mm(y, height_px, cfg.tile_height_mm);
    for (int x = 0; x < width_px; ++x) {
      const double xm = pixel_coordinate_mm(x, width_px, cfg.tile_width_mm);
      const auto path = trace_mirror_path(cfg, xm, ym);
      maps.theta(x, y) = path.theta;
      maps.path_length(x, y) = path.path_length;
    }
  }
  return maps;
}

/// Smallest and largest mirror angle over a tile.
inline std::pair<double, double> angular_span(const ScannerConfig& cfg, int width_px,
                                              int height_px) {
  return min_max(geometry_maps(cfg, width_px, height_px).theta);
}

}  // namespace glossforge
