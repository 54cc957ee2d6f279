#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numbers>
#include <string>

#include "glossforge/errors.hpp"

namespace glossforge {

constexpr double kPi = std::numbers::pi;

constexpr double deg_to_rad(double deg) noexcept { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) noexcept { return rad * 180.0 / kPi; }

/// Refractive indices on both sides of a dielectric interface.
struct OpticalMedium {
  double n1 = 1.0;    ///< ambient (air)
  double n2 = 1.495;  ///< scanned material; oil paint and varnish sit in [1.47, 1.52]

  void validate() const {
    if (!(n1 >= 1.0) || !(n2 >= 1.0) || !std::isfinite(n1) || !std::isfinite(n2))
      throw DomainError("refractive indices must be finite and >= 1");
  }

  /// Air over a paint layer with the given index; the index must lie in the
  /// range reported for oil paints and varnishes.
  static OpticalMedium painting(double n2) {
    if (n2 < 1.47 - 1e-12 || n2 > 1.52 + 1e-12)
      throw DomainError("painting refractive index must lie in [1.47, 1.52]");
    return OpticalMedium{1.0, n2};
  }

  bool operator==(const OpticalMedium&) const = default;
};

/// Power reflectances for s- and p-polarized light.
struct ReflectionCoefficients {
  double rs = 0.0;
  double rp = 0.0;
};

/// Cosine of the transmission angle via Snell's law.
inline double cos_theta_t(double theta_i, const OpticalMedium& media) {
  media.validate();
  if (!(theta_i >= 0.0) || theta_i > kPi / 2.0 + 1e-12)
    throw DomainError("incidence angle must lie in [0, pi/2]");
  const double s = media.n1 / media.n2 * std::sin(theta_i);
  if (s > 1.0)
    throw DomainError("total internal reflection: n1 > n2 past the critical angle");
  return std::sqrt(1.0 - s * s);
}

inline ReflectionCoefficients fresnel(double theta_i, const OpticalMedium& media) {
  const double ct = cos_theta_t(theta_i, media);
  const double ci = std::cos(std::min(theta_i, kPi / 2.0));
  const double n1 = media.n1;
  const double n2 = media.n2;
  const double s = (n1 * ci - n2 * ct) / (n1 * ci + n2 * ct);
  const double p = (n1 * ct - n2 * ci) / (n1 * ct + n2 * ci);
  ReflectionCoefficients out{s * s, p * p};
  assert(out.rs >= 0.0 && out.rs <= 1.0 && out.rp >= 0.0 && out.rp <= 1.0);
  assert(!(n2 > n1) || out.rp <= out.rs + 1e-15);
  return out;
}

/// Incidence angle at which p-polarized reflection vanishes.
inline double brewster_angle(const OpticalMedium& media) {
  media.validate();
  return std::atan(media.n2 / media.n1);
}

/// Fraction of the specular reflection left in the cross-polarized capture.
inline double unpolarized_residual(const ReflectionCoefficients& c) {
  const double total = c.rs + c.rp;
  if (!(total > 0.0)) throw DegenerateError("rs + rp must be positive");
  return c.rp / total;
}

/// Rs - Rp: the polarized part of the specular reflection that survives the
/// difference of the two captures.
inline double polarized_reflectance(double theta_i, const OpticalMedium& media) {
  const auto c = fresnel(theta_i, media);
  return c.rs - c.rp;
}

}  // namespace glossforge
