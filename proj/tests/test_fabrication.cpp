#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "glossforge/config.hpp"
#include "glossforge/fabrication.hpp"

using namespace glossforge;

namespace {

std::vector<std::uint8_t> cells(const Raster<std::uint8_t>& r) { return {r.pixels().begin(), r.pixels().end()}; }

double mean_coverage(const Raster<std::uint8_t>& r) {
  std::size_t n = 0;
  for (auto v : r.pixels()) n += v;
  return static_cast<double>(n) / r.size();
}

double correlation(const Raster<std::uint8_t>& a, const Raster<std::uint8_t>& b) {
  const double ma = mean_coverage(a), mb = mean_coverage(b);
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a.pixels()[i] - ma, db = b.pixels()[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  return sab / std::sqrt(saa * sbb);
}

GlossResponseCurve linear_curve() {
  std::vector<GlossSample> s;
  for (int p = 0; p <= 100; p += 10) s.push_back({double(p), 100.0 - p});
  return fit_gloss_curve(s);
}

}  // namespace

TEST(GlossCurve, LineReproducedExactly) {
  const auto c = linear_curve();
  EXPECT_FALSE(c.increasing());
  for (double p = 0; p <= 100; p += 0.7) EXPECT_NEAR(c(p), 100.0 - p, 1e-9);
  EXPECT_NEAR(c.max_residual(), 0.0, 1e-12);
  EXPECT_NEAR(c.inverse(37.5), 62.5, 1e-9);
}

TEST(GlossCurve, ExponentialRoundTrip) {
  std::vector<GlossSample> s;
  for (int p = 0; p <= 100; p += 10) s.push_back({double(p), 90.0 * std::exp(-p / 30.0) + 4.0});
  const auto c = fit_gloss_curve(s);
  for (int i = 0; i < 100; ++i) {
    const double g = c.g60_min() + (c.g60_max() - c.g60_min()) * i / 99.0;
    EXPECT_NEAR(c(c.inverse(g)), g, 0.5);
  }
}

TEST(GlossCurve, FittedCurveIsMonotone) {
  // Noisy but increasing samples: the fitted curve has a single direction.
  std::mt19937 rng(11);
  std::normal_distribution<double> n(0.0, 2.0);
  std::vector<GlossSample> s;
  for (int p = 0; p <= 100; p += 5) s.push_back({double(p), std::max(0.0, 10 + 0.7 * p + n(rng))});
  const auto c = fit_gloss_curve(s);
  EXPECT_TRUE(c.increasing());
  for (double p = 0.25; p <= 100; p += 0.25) ASSERT_GE(c(p), c(p - 0.25) - 1e-12);
}

TEST(GlossCurve, OrderAndDuplicateInvariance) {
  auto s = default_gloss_samples();
  s.push_back(s[3]);
  s.push_back(s[5]);
  const auto a = fit_gloss_curve(s);
  std::mt19937 rng(2);
  std::shuffle(s.begin(), s.end(), rng);
  const auto b = fit_gloss_curve(s);
  for (double p = 0; p <= 100; p += 1.0) EXPECT_EQ(a(p), b(p));
}

TEST(GlossCurve, NonMonotoneTrendRejected) {
  std::vector<GlossSample> s;
  for (int p = 0; p <= 100; p += 10) s.push_back({double(p), std::abs(p - 50.0)});  // V shape: isotonic RMS is 27% of the range
  EXPECT_THROW(fit_gloss_curve(s), FabricationError);
  EXPECT_THROW(fit_gloss_curve({{0, 1}, {50, 2}}), FabricationError);
}

TEST(GlossCurve, CsvHeaderRequired) {
  const auto s = parse_gloss_csv("print_value,g60\n0,80\n50,40\n100,10\n");
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[1].print_value, 50.0);
  EXPECT_EQ(s[1].g60, 40.0);
  EXPECT_THROW(parse_gloss_csv("p,g\n0,80\n"), FormatError);
  EXPECT_THROW(parse_gloss_csv("print_value,g60\n0;80\n"), FormatError);
  EXPECT_THROW(parse_gloss_csv("print_value,g60\n0,abc\n"), FormatError);
}

TEST(GlossToPrint, RangeEndpointsAndLinearMidpoint) {
  const auto c = linear_curve();
  GlossMap m{ImageF(3, 1), 0.0, 1.0, true};
  m.values(0, 0) = 0.0;
  m.values(1, 0) = 0.5;
  m.values(2, 0) = 1.0;
  const ImageF p = gloss_to_print(m, c);
  EXPECT_NEAR(c(p(0, 0)), c.g60_min(), 1e-6);
  EXPECT_NEAR(c(p(2, 0)), c.g60_max(), 1e-6);
  EXPECT_NEAR(p(0, 0), 100.0, 1e-6);
  EXPECT_NEAR(p(2, 0), 0.0, 1e-6);
  EXPECT_NEAR(p(1, 0), 50.0, 1e-6);
  EXPECT_THROW(gloss_to_print(m, GlossResponseCurve{}), FabricationError);
  m.normalized = false;
  EXPECT_THROW(gloss_to_print(m, c), DomainError);
}

TEST(GlossToPrint, InversionReproducesTarget) {
  const auto c = fit_gloss_curve(default_gloss_samples());
  GlossMap m{ImageF(101, 1), 0.0, 1.0, true};
  for (int i = 0; i <= 100; ++i) m.values(i, 0) = i / 100.0;
  const ImageF p = gloss_to_print(m, c);
  for (int i = 0; i <= 100; ++i) {
    const double target = c.g60_min() + i / 100.0 * (c.g60_max() - c.g60_min());
    EXPECT_NEAR(c(p(i, 0)), target, 0.5);
  }
}

TEST(Slice, UniformHeightPlacesColourAtThatLayer) {
  const double t = 10.0;
  const HeightMap h{ImageF(6, 4, 10 * t / 1000.0), 100.0};
  const auto s = slice(ImageRgb(6, 4, Rgb{1, 0, 0}), h, t);
  EXPECT_EQ(s.layer_count, 10);
  for (int v : s.layer_index.pixels()) EXPECT_EQ(v, 10);
  for (int l = 1; l < 10; ++l)
    for (auto v : cells(s.layer_bitmap(l))) EXPECT_EQ(v, static_cast<std::uint8_t>(Ink::white));
  for (auto v : cells(s.layer_bitmap(10))) EXPECT_NE(v, static_cast<std::uint8_t>(Ink::white));
  for (auto v : cells(s.layer_bitmap(11))) EXPECT_EQ(v, 0);
}

TEST(Slice, ZeroHeightIsSingleLayer) {
  const auto s = slice(ImageRgb(5, 5, Rgb{0, 0, 0}), HeightMap{ImageF(5, 5, 0.0), 100.0}, 2.0);
  EXPECT_EQ(s.layer_count, 1);
  for (auto v : cells(s.layer_bitmap(1))) EXPECT_EQ(v, static_cast<std::uint8_t>(Ink::black));
}

TEST(Slice, RampLayerArithmetic) {
  const int w = 221;
  HeightMap h{ImageF(w, 2), 100.0};
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < w; ++x) h.values(x, y) = 1.1 * x / (w - 1);
  const auto s = slice(ImageRgb(w, 2, Rgb{0.5, 0.5, 0.5}), h, 2.0);
  EXPECT_EQ(s.layer_count, 550);
  for (int x = 1; x < w; ++x) EXPECT_GE(s.layer_index(x, 0), s.layer_index(x - 1, 0));
  for (int x = 0; x < w; ++x)
    EXPECT_EQ(s.layer_index(x, 0), std::max(1, static_cast<int>(std::ceil(h.values(x, 0) * 1000.0 / 2.0 - 1e-9))));
}

TEST(Slice, VoxelConservation) {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(0.0, 0.2);
  HeightMap h{ImageF(20, 15), 100.0};
  for (double& v : h.values.pixels()) v = u(rng);
  const auto s = slice(ImageRgb(20, 15, Rgb{0.2, 0.6, 0.3}), h, 5.0);
  std::size_t white = 0, colour = 0, total = 0;
  for (int l = 1; l <= s.layer_count; ++l)
    for (auto v : cells(s.layer_bitmap(l))) {
      white += v == static_cast<std::uint8_t>(Ink::white);
      colour += v != 0 && v != static_cast<std::uint8_t>(Ink::white);
    }
  for (int v : s.layer_index.pixels()) total += v;
  // Colour voxels that happen to be white ink are counted as white here, so
  // compare totals instead of the colour count alone.
  EXPECT_EQ(white + colour, total);
  std::size_t expected_white_below = 0;
  for (int v : s.layer_index.pixels()) expected_white_below += v - 1;
  EXPECT_GE(white, expected_white_below);
}

TEST(Slice, ZLimitAndNegativeBase) {
  HeightMap h{ImageF(4, 4, 0.0), 100.0};
  h.values(1, 1) = 6.0;
  try {
    slice(ImageRgb(4, 4), h, 10.0);
    FAIL();
  } catch (const FabricationError& e) {
    EXPECT_NE(std::string(e.what()).find("scale"), std::string::npos);
  }
  h.values(1, 1) = -0.1;
  EXPECT_THROW(slice(ImageRgb(4, 4), h, 10.0), DomainError);
}

TEST(Dither, ExtremesAndFlowLayer) {
  const auto full = dither_gloss(ImageF(40, 30, 100.0), 1);
  const auto none = dither_gloss(ImageF(40, 30, 0.0), 1);
  EXPECT_EQ(mean_coverage(full[0]), 1.0);
  EXPECT_EQ(mean_coverage(none[0]), 1.0);
  for (int l = 1; l < kGlossLayers; ++l) {
    EXPECT_EQ(mean_coverage(full[l]), 0.0);
    EXPECT_EQ(mean_coverage(none[l]), 1.0);
  }
  EXPECT_THROW(dither_gloss(ImageF(2, 2, 100.5)), DomainError);
}

TEST(Dither, HalfCoverageDecorrelated) {
  const auto layers = dither_gloss(ImageF(256, 256, 50.0), 7);
  for (int l = 1; l < kGlossLayers; ++l) EXPECT_NEAR(mean_coverage(layers[l]), 0.5, 0.01);
  for (int a = 1; a < kGlossLayers; ++a)
    for (int b = a + 1; b < kGlossLayers; ++b) EXPECT_LT(std::abs(correlation(layers[a], layers[b])), 0.1);
}

TEST(Dither, MeanCoverageTracksTarget) {
  ImageF p(200, 100);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 200; ++x) p(x, y) = 100.0 * x / 199.0;
  const auto layers = dither_gloss(p, 3);
  double target = 0.0;
  for (double v : p.pixels()) target += 1.0 - v / 100.0;
  target /= p.size();
  for (int l = 1; l < kGlossLayers; ++l) EXPECT_NEAR(mean_coverage(layers[l]), target, 0.01);
}

TEST(Dither, MatteInkAntiMonotoneInGloss) {
  // Raising the gloss target of a region never raises its ink coverage.
  const int n = 64;
  double prev = 2.0;
  for (double pv = 0.0; pv <= 100.0; pv += 12.5) {
    const auto layers = dither_gloss(ImageF(n, n, pv), 5);
    double cov = 0.0;
    for (int l = 1; l < kGlossLayers; ++l) cov += mean_coverage(layers[l]);
    cov /= kGlossLayers - 1;
    EXPECT_LE(cov, prev + 1e-12);
    prev = cov;
  }
}

TEST(PrintJob, AssemblesAllParts) {
  HeightMap h{ImageF(30, 20), 100.0};
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 30; ++x) h.values(x, y) = -0.05 + 0.002 * x;
  GlossMap g{ImageF(30, 20, 0.5), 0.0, 1.0, true};
  const auto job = make_print_job(ImageRgb(30, 20, Rgb{0.3, 0.3, 0.3}), h, g,
                                  fit_gloss_curve(default_gloss_samples()), 10.0, 450.0, 1);
  EXPECT_EQ(job.color.layer_index(0, 0), 1);
  EXPECT_EQ(job.color.layer_count, static_cast<int>(std::ceil(0.002 * 29 * 1000 / 10.0 - 1e-9)));
  EXPECT_EQ(job.gloss_layers[0].width(), 30);
  EXPECT_EQ(job.dpi, 450.0);
}
