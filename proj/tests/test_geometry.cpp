#include <gtest/gtest.h>

#include <cmath>

#include "glossforge/geometry.hpp"

using namespace glossforge;

namespace {

// Real lamp plane: perpendicular to the lamp axis (sin, 0, cos) at distance k.
double lamp_plane_offset(const ScannerConfig& c, const Vec3& p) {
  return std::sin(c.theta_mount) * p.x + std::cos(c.theta_mount) * p.z - c.lamp_distance_mm;
}

double angle_to_normal(const Vec3& v) { return std::acos(v.z / v.norm()); }

}  // namespace

TEST(ScannerConfig, DefaultsDescribeOneTile) {
  const ScannerConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.raster_width(), 7200);
  EXPECT_EQ(c.raster_height(), 3600);
  EXPECT_NEAR(rad_to_deg(c.theta_mount), 56.3, 0.1);
}

TEST(ScannerConfig, RejectsBadValues) {
  ScannerConfig c;
  c.lamp_distance_mm = 0;
  EXPECT_THROW(c.validate(), DomainError);
  c = {};
  c.theta_mount = kPi / 2;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(GeometryMaps, CentrePixelSeesMountAngleAndNominalPath) {
  const ScannerConfig c;
  for (auto [w, h] : {std::pair{7, 5}, std::pair{8, 4}, std::pair{1, 1}, std::pair{720, 360}}) {
    const auto g = geometry_maps(c, w, h);
    EXPECT_NEAR(g.theta(centre_index(w), centre_index(h)), c.theta_mount, 1e-6);
    EXPECT_NEAR(g.path_length(centre_index(w), centre_index(h)), 900.0, 1e-6);
  }
}

TEST(GeometryMaps, DoubledDistancesDoubleCentrePath) {
  ScannerConfig c;
  c.lamp_distance_mm = c.camera_distance_mm = 900.0;
  const auto g = geometry_maps(c, 9, 5);
  EXPECT_NEAR(g.path_length(4, 2), 1800.0, 1e-6);
  EXPECT_NEAR(g.theta(4, 2), c.theta_mount, 1e-9);
}

TEST(GeometryMaps, ThetaIncreasesFromCameraSideEdge) {
  const auto g = geometry_maps(ScannerConfig{}, 360, 90);
  for (int y = 0; y < 90; y += 7)
    for (int x = 1; x < 360; ++x) ASSERT_GT(g.theta(x, y), g.theta(x - 1, y));
}

TEST(GeometryMaps, PathLengthIsSmooth) {
  const auto g = geometry_maps(ScannerConfig{}, 360, 180);
  // Bound on |d path / d pixel| from the chain rule: at most ~one pixel pitch
  // (0.5 mm here) times a factor of order one per pixel.
  for (int y = 0; y < 180; ++y)
    for (int x = 1; x < 360; ++x) ASSERT_LT(std::abs(g.path_length(x, y) - g.path_length(x - 1, y)), 1.0);
}

TEST(MirrorPath, LawOfReflectionHoldsAtSampledPixels) {
  const ScannerConfig c;
  for (double x : {-90.0, -45.0, 0.0, 30.0, 90.0})
    for (double y : {-45.0, 0.0, 20.0, 45.0}) {
      const auto p = trace_mirror_path(c, x, y);
      const Vec3 in = p.lamp - p.surface;     // towards the real lamp
      const Vec3 out = p.camera - p.surface;  // towards the camera
      EXPECT_NEAR(angle_to_normal(in), angle_to_normal(out), 1e-9);
      // Incident and exit rays are coplanar with the normal and point to opposite sides.
      EXPECT_NEAR(in.x * out.y - in.y * out.x, 0.0, 1e-6);
      EXPECT_LT(in.x * out.x + in.y * out.y, 0.0);
      EXPECT_NEAR(lamp_plane_offset(c, p.lamp), 0.0, 1e-9);
      EXPECT_NEAR(p.path_length, out.norm() + in.norm(), 1e-9);
      EXPECT_NEAR(p.theta, angle_to_normal(out), 1e-12);
    }
}

TEST(MirrorPath, BoundedLampThatIsTooSmallFails) {
  ScannerConfig c;
  c.lamp_width_mm = 50.0;
  EXPECT_NO_THROW(trace_mirror_path(c, 0.0, 0.0));
  EXPECT_THROW(trace_mirror_path(c, 90.0, 0.0), GeometryError);
  EXPECT_THROW(geometry_maps(c, 180, 90), GeometryError);
  c.lamp_width_mm = 2000.0;
  c.lamp_height_mm = 2000.0;
  EXPECT_NO_THROW(geometry_maps(c, 180, 90));
}

TEST(AngularSpan, BracketsMountAngle) {
  const ScannerConfig c;
  const auto [lo, hi] = angular_span(c, 720, 360);
  EXPECT_LT(lo, c.theta_mount);
  EXPECT_GT(hi, c.theta_mount);
  const auto [a, b] = angular_span(c, 1, 1);
  EXPECT_DOUBLE_EQ(a, c.theta_mount);
  EXPECT_DOUBLE_EQ(b, c.theta_mount);
}

TEST(AngularSpan, EdgeReflectanceNearPublishedEdgeValues) {
  // Cross-check against the tile-edge Rs values (0.1045 at the camera edge,
  // 0.1899 at the lamp edge) with a loose tolerance: the camera distance and
  // the exact edge positions are not published.
  const ScannerConfig c;
  const auto g = geometry_maps(c, 721, 1);
  const double rs_a = fresnel(g.theta(0, 0), c.media).rs;
  const double rs_c = fresnel(g.theta(720, 0), c.media).rs;
  EXPECT_NEAR(rs_a, 0.1045, 0.15 * 0.1045);
  EXPECT_NEAR(rs_c, 0.1899, 0.15 * 0.1899);
}

TEST(AngularSpan, EdgeAngleBackSolveAgreesWithGeometry) {
  // Root-find the angle giving Rs = 0.1045 at n2 = 1.495 and compare to the A edge.
  const ScannerConfig c;
  double lo = deg_to_rad(30.0), hi = c.theta_mount;
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (lo + hi);
    (fresnel(mid, c.media).rs < 0.1045 ? lo : hi) = mid;
  }
  const auto g = geometry_maps(c, 721, 1);
  EXPECT_NEAR(rad_to_deg(g.theta(0, 0)), rad_to_deg(lo), 2.0);
}
