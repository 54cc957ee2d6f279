#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "glossforge/config.hpp"
#include "glossforge/gloss.hpp"
#include "glossforge/simulator.hpp"

using namespace glossforge;

namespace {

SceneSpec flat_spec(int w, int h, double rho_s = 0.3) {
  SceneSpec s;
  s.width = w;
  s.height = h;
  s.pixel_pitch_um = 500.0;
  s.gloss_layers = {ConstantGloss{rho_s}};
  s.albedo = AlbedoSpec{{0.4, 0.3, 0.2}, 0.0, 16.0, 1};
  return s;
}

double rms_normalized_difference(const ImageF& a, const ImageF& b, const Mask& skip) {
  const auto [alo, ahi] = min_max(a);
  const auto [blo, bhi] = min_max(b);
  double s = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) {
      if (skip(x, y)) continue;
      const double d = (a(x, y) - alo) / (ahi - alo) - (b(x, y) - blo) / (bhi - blo);
      s += d * d;
      ++n;
    }
  return std::sqrt(s / n);
}

}  // namespace

TEST(Rng, StreamIsDeterministicAndUniform) {
  rng::Stream a(42), b(42);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = a.uniform();
    ASSERT_EQ(u, b.uniform());
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
  }
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
  for (int i = 0; i < 100000; ++i) {
    const double n = a.normal();
    sq += n * n;
  }
  EXPECT_NEAR(sq / 100000, 1.0, 0.02);
}

TEST(MakeScene, ConstantSpecIsUniform) {
  SceneSpec s = flat_spec(20, 10);
  s.height_layers = {ConstantHeight{0.7}};
  const auto sc = make_scene(s);
  for (double v : sc.height.values.pixels()) EXPECT_EQ(v, 0.7);
  for (double v : sc.rho_s.pixels()) EXPECT_EQ(v, 0.3);
  for (const auto& p : sc.rho_d.pixels()) EXPECT_EQ(p, (Rgb{0.4, 0.3, 0.2}));
  EXPECT_EQ(sc.config.raster_width(), 20);
  EXPECT_EQ(sc.config.raster_height(), 10);
}

TEST(MakeScene, SeededTextureIsDeterministic) {
  const SceneSpec s = default_simulation().scene;
  const auto a = make_scene(s), b = make_scene(s);
  EXPECT_EQ(a.height.values, b.height.values);
  EXPECT_EQ(a.rho_s, b.rho_s);
  EXPECT_EQ(a.rho_d, b.rho_d);
  SceneSpec other = s;
  other.seed = s.seed + 1;
  EXPECT_NE(make_scene(other).height.values, a.height.values);
}

TEST(MakeScene, StepHistogramIsBimodal) {
  SceneSpec s = flat_spec(40, 10);
  s.height_layers = {StepHeight{25.0, true, 0.5}};
  const auto sc = make_scene(s);
  std::set<double> levels(sc.height.values.pixels().begin(), sc.height.values.pixels().end());
  EXPECT_EQ(levels, (std::set<double>{0.0, 0.5}));
  EXPECT_EQ(sc.height.values(24, 3), 0.0);
  EXPECT_EQ(sc.height.values(25, 3), 0.5);
}

TEST(MakeScene, UnknownPrimitiveRejected) {
  EXPECT_THROW(height_primitive_from_json(nlohmann::json{{"type", "volcano"}}, "layer"), DomainError);
  EXPECT_THROW(gloss_primitive_from_json(nlohmann::json{{"type", "sparkle"}}, "layer"), DomainError);
  EXPECT_NO_THROW(height_primitive_from_json(nlohmann::json{{"type", "ramp"}, {"slope_deg", 3.0}}, "layer"));
}

TEST(RenderPair, ZeroSpecularGivesIdenticalCaptures) {
  SceneSpec s = flat_spec(32, 16, 0.0);
  s.height_layers = {TextureHeight{0.2, 8.0, 2}};
  const auto r = render_pair(make_scene(s));
  EXPECT_EQ(r.pair.i1, r.pair.i2);
  EXPECT_EQ(r.clamped, 0u);
}

TEST(RenderPair, ResidualConsistencyPerPixel) {
  const auto sc = make_scene(default_simulation().scene);
  const auto r = render_pair(sc);
  for (int y = 0; y < sc.rho_s.height(); y += 5)
    for (int x = 0; x < sc.rho_s.width(); x += 5) {
      const double tot = r.truth.i1_specular(x, y) + r.truth.i2_specular(x, y);
      if (tot <= 0.0) continue;
      const auto c = fresnel(r.truth.geometry.theta(x, y), sc.media);
      ASSERT_NEAR(r.truth.i2_specular(x, y) / tot, unpolarized_residual(c), 1e-12);
    }
}

TEST(RenderPair, EnergyStaysInRangeForDefaultScene) {
  const auto r = render_pair(make_scene(default_simulation().scene));
  EXPECT_EQ(r.clamped, 0u);
  for (const auto* img : {&r.pair.i1, &r.pair.i2})
    for (const auto& p : img->pixels())
      for (double v : {p.r, p.g, p.b}) {
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, kMaxIntensity);
      }
}

TEST(RenderPair, ClampingIsCounted) {
  SceneSpec s = flat_spec(8, 8, 5.0);
  const auto r = render_pair(make_scene(s));
  EXPECT_GT(r.clamped, 0u);
  for (const auto& p : r.pair.i1.pixels()) EXPECT_LE(p.r, kMaxIntensity);
}

TEST(RenderPair, FlatSceneClosedLoop) {
  const auto sc = make_scene(flat_spec(256, 128));
  const auto r = render_pair(sc);
  const auto corr = correction_maps(r.truth.geometry, sc.config);
  const GlossMap raw = raw_gloss(r.pair);
  const GlossMap g = correct_gloss(raw, corr);
  for (int y = 0; y < 128; y += 7)
    for (int x = 0; x < 256; x += 7) {
      const auto c = fresnel(r.truth.geometry.theta(x, y), sc.media);
      // Raw difference matches rho_s e (Rs - Rp)/pol_centre, i.e. S (Rs - Rp)/(Rs + Rp).
      const double expected =
          r.truth.specular(x, y) * (c.rs - c.rp) / (c.rs + c.rp);
      ASSERT_NEAR(raw.values(x, y), expected, 1e-12);
    }
  EXPECT_LT(coefficient_of_variation(g.values, nullptr), 0.005);
  EXPECT_GT(coefficient_of_variation(raw.values, nullptr), 0.05);
}

TEST(RenderPair, StepShadowZeroesSpecular) {
  SceneSpec s = flat_spec(120, 6);
  s.pixel_pitch_um = 100.0;
  s.height_layers = {StepHeight{80.0, true, 0.5}};
  const auto r = render_pair(make_scene(s));
  const int run = static_cast<int>(std::round(0.5 * 1.495 / 0.1));
  for (int y = 0; y < 6; ++y) {
    for (int x = 80 - run + 1; x < 80; ++x) {
      EXPECT_EQ(r.truth.shadow(x, y), 1) << x;
      EXPECT_EQ(r.truth.i1_specular(x, y), 0.0);
      EXPECT_EQ(r.truth.i2_specular(x, y), 0.0);
      EXPECT_EQ(r.pair.i1(x, y), r.pair.i2(x, y));
    }
    EXPECT_EQ(r.truth.shadow(10, y), 0);
  }
}

TEST(RenderPair, RoundTripOutsideMasks) {
  SceneSpec s = default_simulation().scene;
  s.height_layers = {TextureHeight{0.02, 24, 3}, BumpsHeight{8, 0.2, 14}};
  const auto sc = make_scene(s);
  const auto r = render_pair(sc);
  const auto g = correct_gloss(raw_gloss(r.pair), correction_maps(r.truth.geometry, sc.config));
  const MaskSet m = build_masks(sc.height);
  EXPECT_LT(rms_normalized_difference(g.values, sc.rho_s, m.combined), 0.02);
}

TEST(RenderPair, NoiseIsSeeded) {
  const auto sc = make_scene(flat_spec(16, 8));
  RenderOptions o;
  o.noise_sigma = 0.01;
  o.noise_seed = 9;
  const auto a = render_pair(sc, o), b = render_pair(sc, o);
  EXPECT_EQ(a.pair.i1, b.pair.i1);
  o.noise_seed = 10;
  EXPECT_NE(render_pair(sc, o).pair.i1, a.pair.i1);
}

TEST(PlanTiles, AnalyticGridWithoutJitter) {
  const auto t = plan_tiles(170, 130, 2, 2, 0.3);
  ASSERT_EQ(t.size(), 4u);
  // len = ceil(170 / 1.7) = 100, ceil(130 / 1.7) = 77; starts at 0 and W - len.
  for (const auto& p : t) {
    EXPECT_EQ(p.width, 100);
    EXPECT_EQ(p.height, 77);
    EXPECT_EQ(p.nominal, p.actual);
    EXPECT_EQ(p.nominal.dx, p.grid_pos.col * 70);
    EXPECT_EQ(p.nominal.dy, p.grid_pos.row * 53);
  }
  const double overlap = (100.0 - 70.0) / 100.0;
  EXPECT_NEAR(overlap, 0.3, 0.01);
}

TEST(PlanTiles, JitterBookkeeping) {
  const auto t = plan_tiles(300, 200, 3, 3, 0.3, 5, 17);
  bool any = false;
  for (const auto& p : t) {
    EXPECT_LE(std::abs(p.actual.dx - p.nominal.dx), 5);
    EXPECT_LE(std::abs(p.actual.dy - p.nominal.dy), 5);
    EXPECT_GE(p.actual.dx, 0);
    EXPECT_GE(p.actual.dy, 0);
    EXPECT_LE(p.actual.dx + p.width, 300);
    EXPECT_LE(p.actual.dy + p.height, 200);
    any = any || !(p.actual == p.nominal);
  }
  EXPECT_TRUE(any);
  const auto again = plan_tiles(300, 200, 3, 3, 0.3, 5, 17);
  for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(t[i].actual, again[i].actual);
}

TEST(PlanTiles, GridOverflow) {
  EXPECT_THROW(plan_tiles(10, 10, 20, 1, 0.3), DomainError);
  EXPECT_THROW(plan_tiles(10, 10, 1, 1, 0.3, 6), DomainError);
  EXPECT_THROW(plan_tiles(10, 10, 0, 1, 0.3), DomainError);
}

TEST(CutTiles, UnjitteredReassemblyIsBitExact) {
  const auto sc = make_scene(default_simulation().scene);
  const auto plan = plan_tiles(sc.rho_s.width(), sc.rho_s.height(), 2, 3, 0.3);
  ImageF rebuilt(sc.rho_s.width(), sc.rho_s.height(), -1.0);
  for (const auto& p : plan) {
    const ImageF t = cut_tile(sc.rho_s, p);
    for (int y = 0; y < p.height; ++y)
      for (int x = 0; x < p.width; ++x) rebuilt(p.actual.dx + x, p.actual.dy + y) = t(x, y);
  }
  EXPECT_EQ(rebuilt, sc.rho_s);
}

TEST(RotateScene, FourQuarterTurnsIsIdentity) {
  const auto sc = make_scene(flat_spec(12, 7));
  const auto r1 = rotate_scene(sc, 1);
  EXPECT_EQ(r1.rho_s.width(), 7);
  EXPECT_EQ(r1.config.raster_width(), 7);
  const auto r4 = rotate_scene(rotate_scene(r1, 2), 1);
  EXPECT_EQ(r4.rho_d, sc.rho_d);
  EXPECT_EQ(r4.height.values, sc.height.values);
}
