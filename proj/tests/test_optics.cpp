#include <gtest/gtest.h>

#include <cmath>

#include "glossforge/optics.hpp"

using namespace glossforge;

namespace {

// Fresnel power reflectances written out with explicit refraction angle, used
// as an oracle independent of cos_theta_t.
ReflectionCoefficients fresnel_oracle(double ti, double n1, double n2) {
  const double tt = std::asin(n1 / n2 * std::sin(ti));
  const double rs = std::pow(std::sin(ti - tt) / std::sin(ti + tt), 2);
  const double rp = std::pow(std::tan(ti - tt) / std::tan(ti + tt), 2);
  return {rs, rp};
}

}  // namespace

TEST(CosThetaT, NormalIncidenceIsOne) { EXPECT_DOUBLE_EQ(cos_theta_t(0.0, {1.0, 1.5}), 1.0); }

TEST(CosThetaT, GrazingIncidence) {
  EXPECT_NEAR(cos_theta_t(kPi / 2, {1.0, 1.5}), std::sqrt(1.0 - 1.0 / 2.25), 1e-12);
  EXPECT_NEAR(cos_theta_t(kPi / 2, {1.0, 1.5}), 0.7454, 5e-5);
}

TEST(CosThetaT, RejectsAnglesOutsideQuarterTurn) {
  EXPECT_THROW(cos_theta_t(-0.1, {1.0, 1.5}), DomainError);
  EXPECT_THROW(cos_theta_t(kPi / 2 + 0.01, {1.0, 1.5}), DomainError);
}

TEST(CosThetaT, TotalInternalReflectionIsDomainError) {
  EXPECT_THROW(cos_theta_t(deg_to_rad(60.0), {1.5, 1.0}), DomainError);
  EXPECT_NO_THROW(cos_theta_t(deg_to_rad(30.0), {1.5, 1.0}));
}

TEST(Fresnel, NormalIncidenceSymmetry) {
  const auto c = fresnel(0.0, {1.0, 1.5});
  EXPECT_NEAR(c.rs, 0.04, 1e-15);
  EXPECT_NEAR(c.rp, 0.04, 1e-15);
}

TEST(Fresnel, GrazingLimitApproachesOne) {
  const auto c = fresnel(kPi / 2, {1.0, 1.495});
  EXPECT_NEAR(c.rs, 1.0, 1e-12);
  EXPECT_NEAR(c.rp, 1.0, 1e-12);
}

TEST(Fresnel, MatchesSineTangentForm) {
  for (double n2 : {1.33, 1.47, 1.495, 1.52, 2.4}) {
    for (double deg = 1.0; deg < 89.5; deg += 2.5) {
      const double t = deg_to_rad(deg);
      const auto c = fresnel(t, {1.0, n2});
      const auto o = fresnel_oracle(t, 1.0, n2);
      EXPECT_NEAR(c.rs, o.rs, 1e-12) << n2 << " " << deg;
      EXPECT_NEAR(c.rp, o.rp, 1e-12) << n2 << " " << deg;
    }
  }
}

TEST(Fresnel, PolarizationOrderingProperty) {
  for (double n2 = 1.0; n2 <= 2.0; n2 += 0.05)
    for (double deg = 0.0; deg <= 90.0; deg += 0.5) {
      const auto c = fresnel(deg_to_rad(deg), {1.0, n2});
      ASSERT_GE(c.rp, 0.0);
      ASSERT_LE(c.rs, 1.0 + 1e-15);
      ASSERT_LE(c.rp, c.rs + 1e-15);
    }
}

TEST(Brewster, PaintRange) {
  EXPECT_NEAR(rad_to_deg(brewster_angle({1.0, 1.47})), 55.8, 0.05);
  EXPECT_NEAR(rad_to_deg(brewster_angle({1.0, 1.52})), 56.7, 0.05);
  EXPECT_DOUBLE_EQ(rad_to_deg(brewster_angle({1.0, 1.0})), 45.0);
}

TEST(Brewster, PPolarizedReflectionVanishes) {
  for (double n2 : {1.2, 1.47, 1.495, 1.52, 1.9}) {
    const OpticalMedium m{1.0, n2};
    EXPECT_LE(fresnel(brewster_angle(m), m).rp, 1e-9);
  }
}

TEST(Residual, ZeroAtBrewsterAndBoundedElsewhere) {
  const OpticalMedium m{1.0, 1.495};
  EXPECT_LE(unpolarized_residual(fresnel(brewster_angle(m), m)), 1e-9);
  const auto c = fresnel(deg_to_rad(30.0), m);
  EXPECT_NEAR(unpolarized_residual(c), c.rp / (c.rs + c.rp), 0.0);
  EXPECT_THROW(unpolarized_residual({0.0, 0.0}), DegenerateError);
}

TEST(OpticalMedium, PaintingPresetRange) {
  EXPECT_NO_THROW(OpticalMedium::painting(1.47));
  EXPECT_NO_THROW(OpticalMedium::painting(1.52));
  EXPECT_THROW(OpticalMedium::painting(1.46), DomainError);
  EXPECT_THROW(OpticalMedium::painting(1.53), DomainError);
  EXPECT_THROW((OpticalMedium{0.9, 1.5}.validate()), DomainError);
}
