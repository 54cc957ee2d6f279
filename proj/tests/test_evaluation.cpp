#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "glossforge/evaluation.hpp"

using namespace glossforge;

namespace {

ImageF textured(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageF coarse((w + 3) / 4 + 2, (h + 3) / 4 + 2);
  for (double& v : coarse.pixels()) v = u(rng);
  ImageF out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double fx = x / 4.0, fy = y / 4.0;
      const int ix = static_cast<int>(fx), iy = static_cast<int>(fy);
      const double tx = fx - ix, ty = fy - iy;
      out(x, y) = (1 - tx) * (1 - ty) * coarse(ix, iy) + tx * (1 - ty) * coarse(ix + 1, iy) +
                  (1 - tx) * ty * coarse(ix, iy + 1) + tx * ty * coarse(ix + 1, iy + 1);
    }
  return out;
}

}  // namespace

TEST(DifferenceStats, IdenticalMapsGiveZeros) {
  const ImageF a = textured(40, 30, 1);
  const Mask none(40, 30, 0);
  const auto r = difference_stats(a, a, none, none, 0.0, 1.0);
  EXPECT_EQ(r.mean, 0.0);
  EXPECT_EQ(r.std, 0.0);
  EXPECT_EQ(r.laplace_mu, 0.0);
  EXPECT_EQ(r.laplace_b, 0.0);
  ASSERT_EQ(r.histogram.counts.size(), 80u);
  EXPECT_EQ(r.histogram.counts[40], a.size());
  EXPECT_EQ(r.histogram.total(), a.size());
}

TEST(DifferenceStats, PercentOfJointRange) {
  const ImageF a(4, 4, 0.6), b(4, 4, 0.5);
  const Mask none(4, 4, 0);
  const auto r = difference_stats(a, b, none, none, 0.0, 0.5);
  EXPECT_NEAR(r.mean, 20.0, 1e-12);
}

TEST(DifferenceStats, ExactAntisymmetry) {
  const ImageF a = textured(50, 40, 2), b = textured(50, 40, 3);
  Mask ma(50, 40, 0), mb(50, 40, 0);
  ma(3, 3) = 1;
  mb(10, 20) = 1;
  const auto ab = difference_stats(a, b, ma, mb, 0.0, 1.0);
  const auto ba = difference_stats(b, a, mb, ma, 0.0, 1.0);
  EXPECT_EQ(ab.mean, -ba.mean);
  EXPECT_EQ(ab.std, ba.std);
  EXPECT_EQ(ab.laplace_b, ba.laplace_b);
  EXPECT_EQ(ab.masked.mean, -ba.masked.mean);
}

TEST(DifferenceStats, MaskedUnionAndConservation) {
  const ImageF a = textured(30, 20, 4), b = textured(30, 20, 5);
  Mask ma(30, 20, 0), mb(30, 20, 0);
  for (int x = 0; x < 10; ++x) ma(x, 0) = 1;
  for (int x = 5; x < 15; ++x) mb(x, 0) = 1;
  const auto r = difference_stats(a, b, ma, mb, 0.0, 1.0);
  EXPECT_EQ(r.masked.count, 15u);
  EXPECT_EQ(r.masked.count + r.unmasked.count, a.size());
  EXPECT_EQ(r.all.count, a.size());
  EXPECT_LE(r.unmasked.abs_q1, r.unmasked.abs_median);
  EXPECT_LE(r.unmasked.abs_median, r.unmasked.abs_q3);
}

TEST(DifferenceStats, EmptyUnmaskedRegionRejected) {
  const ImageF a(5, 5, 0.2);
  EXPECT_THROW(difference_stats(a, a, Mask(5, 5, 1), Mask(5, 5, 0), 0.0, 1.0), DegenerateError);
  EXPECT_THROW(difference_stats(a, a, Mask(5, 5, 0), Mask(5, 5, 0), 1.0, 1.0), DegenerateError);
}

TEST(DifferenceStats, HistogramCountsClipRange) {
  ImageF a(10, 1, 0.0), b(10, 1, 0.0);
  for (int x = 0; x < 10; ++x) a(x, 0) = (x - 4) * 0.125;  // -50%..62.5% in 12.5% steps
  const auto r = difference_stats(a, b, Mask(10, 1, 0), Mask(10, 1, 0), 0.0, 1.0);
  EXPECT_EQ(r.histogram.total(), 7u);  // -37.5 .. 37.5
  EXPECT_EQ(r.all.count, 10u);
}

TEST(FitLaplace, RecoversScale) {
  std::mt19937_64 rng(12);
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution sign(0.5);
  const double b0 = 3.0, mu0 = 0.7;
  std::vector<double> d(200000);
  for (double& v : d) v = mu0 + (sign(rng) ? 1.0 : -1.0) * b0 * e(rng);
  const auto [mu, b] = fit_laplace(d);
  EXPECT_NEAR(b, b0, 0.05 * b0);
  EXPECT_NEAR(mu, mu0, 0.05);
  EXPECT_THROW(fit_laplace({}), DegenerateError);
}

TEST(BestShift, RecoversJitterExactly) {
  const ImageF base = textured(80, 60, 7);
  // moving(x + 2, y - 1) == ref(x, y)
  ImageF moving(80, 60, 0.0);
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 80; ++x)
      if (base.contains(x - 2, y + 1)) moving(x, y) = base(x - 2, y + 1);
  const auto s = best_shift(base, moving, 8);
  EXPECT_EQ(s.offset, (PixelOffset{2, -1}));
  EXPECT_NEAR(s.ncc, 1.0, 1e-9);
  EXPECT_EQ(best_shift(base, base, 8).offset, (PixelOffset{0, 0}));
}

TEST(AlignRotations, IdenticalMapRotatedFourWays) {
  const ImageF m = textured(48, 48, 8);
  std::vector<ImageF> maps;
  for (int k = 0; k < 4; ++k) maps.push_back(rotate_ccw(m, k));
  const auto st = align_rotations(maps, {0, 1, 2, 3});
  for (const auto& a : st.maps) EXPECT_EQ(a, m);
  for (const auto& o : st.offsets) EXPECT_EQ(o, (PixelOffset{0, 0}));
}

TEST(AlignRotations, PerOrientationJitterRecovered) {
  const ImageF big = textured(80, 80, 9);
  const ImageF ref = crop(big, 10, 10, 60, 60);
  const ImageF jit = crop(big, 12, 9, 60, 60);  // content displaced by (2, -1)
  const auto st = align_rotations({ref, rotate_ccw(jit, 1)}, {0, 1});
  EXPECT_EQ(st.offsets[1], (PixelOffset{-2, 1}));
  for (int y = 0; y < 60; ++y)
    for (int x = 0; x < 60; ++x)
      if (st.valid[1](x, y)) {
        ASSERT_EQ(st.maps[1](x, y), ref(x, y));
      }
}

TEST(AlignRotations, HalfTurnTwiceIsIdentityAndShapesChecked) {
  const ImageF m = textured(20, 10, 10);
  EXPECT_EQ(rotate_ccw(rotate_ccw(m, 2), 2), m);
  EXPECT_THROW(align_rotations({m, m}, {0, 1}), ShapeMismatch);
}

TEST(DifferenceStats, ScalingInvarianceOfNormalizedStats) {
  const ImageF a = textured(40, 40, 11), b = textured(40, 40, 12);
  const Mask none(40, 40, 0);
  const auto r1 = difference_stats(a, b, none, none, 0.0, 1.0);
  ImageF a2 = a, b2 = b;
  for (double& v : a2.pixels()) v *= 3.5;
  for (double& v : b2.pixels()) v *= 3.5;
  const auto r2 = difference_stats(a2, b2, none, none, 0.0, 3.5);
  EXPECT_NEAR(r1.mean, r2.mean, 1e-9);
  EXPECT_NEAR(r1.std, r2.std, 1e-9);
  EXPECT_NEAR(r1.laplace_b, r2.laplace_b, 1e-9);
  EXPECT_EQ(r1.histogram.counts, r2.histogram.counts);
}
