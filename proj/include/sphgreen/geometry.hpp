#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "sphgreen/errors.hpp"

namespace sphgreen {

/// Earth's mean radius. Table-style inputs are expressed relative to it.
inline constexpr double kDefaultRadiusKm = 6371.0;

/// Separations with 1 - cos(gamma) below this are treated as coincident points.
inline constexpr double kCoincidentTol = 1e-15;

/// Physical configuration of the shell: sphere radius R and Rossby radius L_d.
///
/// gamma_star = L_d / R is the angular footprint of the screening length,
/// w = (R / L_d)^2 the screening constant in the Legendre denominators and
/// beta = sqrt(w - 1/4) the frequency of the integral representation.
class ShellParams {
public:
  double radius_km() const noexcept { return radius_km_; }
  double rossby_km() const noexcept { return rossby_km_; }
  double gamma_star() const noexcept { return gamma_star_; }
  double w() const noexcept { return w_; }
  double beta() const noexcept { return beta_; }

  friend ShellParams make_params(double radius_km, double rossby_km);

private:
  ShellParams() = default;

  double radius_km_ = 0;
  double rossby_km_ = 0;
  double gamma_star_ = 0;
  double w_ = 0;
  double beta_ = 0;
};

inline ShellParams make_params(double radius_km, double rossby_km) {
  if (!(radius_km > 0) || !(rossby_km > 0) || !std::isfinite(radius_km) ||
      !std::isfinite(rossby_km)) {
    throw InvalidParams("radius and Rossby radius must be positive and finite (got R=" +
                        std::to_string(radius_km) + " km, L_d=" + std::to_string(rossby_km) +
                        " km)");
  }
  if (!(radius_km / rossby_km > 0.5)) {
    throw BetaImaginary("R/L_d must exceed 1/2 for beta to be real (got R/L_d=" +
                        std::to_string(radius_km / rossby_km) + ")");
  }
  ShellParams p;
  p.radius_km_ = radius_km;
  p.rossby_km_ = rossby_km;
  p.gamma_star_ = rossby_km / radius_km;
  p.w_ = 1.0 / (p.gamma_star_ * p.gamma_star_);
  p.beta_ = std::sqrt(p.w_ - 0.25);
  return p;
}

/// A point on the shell: colatitude theta in [0, pi], longitude phi in [0, 2 pi].
struct SphericalPoint {
  double theta = 0;
  double phi = 0;

  static SphericalPoint make(double theta, double phi) {
    if (!(theta >= 0 && theta <= std::numbers::pi) ||
        !(phi >= 0 && phi <= 2 * std::numbers::pi)) {
      throw ArgOutOfRange("spherical point outside [0,pi]x[0,2pi]: theta=" +
                          std::to_string(theta) + " phi=" + std::to_string(phi));
    }
    return {theta, phi};
  }
};

/// The Green's function's only geometric argument: the central angle gamma.
///
/// Besides gamma and cos(gamma) the versine 1 - cos(gamma) is kept separately.
/// It is formed without cancellation when gamma is small, which is where the
/// logarithmic part of the kernel needs it.
class EvalPoint {
public:
  static EvalPoint from_angle(double gamma) {
    if (!(gamma > 0 && gamma <= std::numbers::pi)) {
      throw ArgOutOfRange("central angle must lie in (0, pi], got " + std::to_string(gamma));
    }
    const double s = std::sin(0.5 * gamma);
    return checked(gamma, std::cos(gamma), 2 * s * s);
  }

  /// cos(gamma) taken as exact; used for the tabulated cases cos(gamma) = 0 and -1.
  static EvalPoint from_cos(double cos_gamma) {
    if (!(cos_gamma >= -1.0 && cos_gamma <= 1.0)) {
      throw ArgOutOfRange("cos(gamma) must lie in [-1, 1], got " + std::to_string(cos_gamma));
    }
    return checked(std::acos(cos_gamma), cos_gamma, 1.0 - cos_gamma);
  }

  /// gamma = ratio * gamma_star, the parameterisation used for tables and figures.
  static EvalPoint from_ratio(double ratio, const ShellParams& params) {
    return from_angle(ratio * params.gamma_star());
  }

  double gamma() const noexcept { return gamma_; }
  double cos_gamma() const noexcept { return cos_gamma_; }
  double versine() const noexcept { return versine_; }

  friend EvalPoint central_angle(const SphericalPoint& a, const SphericalPoint& b);

private:
  EvalPoint(double g, double c, double v) : gamma_(g), cos_gamma_(c), versine_(v) {}

  static EvalPoint checked(double gamma, double cos_gamma, double versine) {
    if (!(versine >= kCoincidentTol)) {
      throw DegenerateSeparation("points coincide (1 - cos(gamma) = " + std::to_string(versine) +
                                 "); the Green's function is singular there");
    }
    return EvalPoint(gamma, cos_gamma, versine);
  }

  double gamma_;
  double cos_gamma_;
  double versine_;
};

/// Great-circle angle in [0, pi]; zero separation allowed (no singularity check).
inline double angular_separation(const SphericalPoint& a, const SphericalPoint& b) noexcept {
  const double sdt = std::sin(0.5 * (a.theta - b.theta));
  const double sdp = std::sin(0.5 * (a.phi - b.phi));
  const double hav = sdt * sdt + (std::sin(a.theta) * std::sin(b.theta)) * (sdp * sdp);
  return 2 * std::asin(std::min(1.0, std::sqrt(hav)));
}

/// Central angle between two points, via the haversine form of
/// cos(gamma) = cos(t)cos(t') + sin(t)sin(t')cos(phi - phi').
inline EvalPoint central_angle(const SphericalPoint& a, const SphericalPoint& b) {
  const double sdt = std::sin(0.5 * (a.theta - b.theta));
  const double sdp = std::sin(0.5 * (a.phi - b.phi));
  // Each product is written so swapping a and b yields the same rounding.
  const double hav = sdt * sdt + (std::sin(a.theta) * std::sin(b.theta)) * (sdp * sdp);
  double versine = 2 * hav;
  if (versine > 2.0) versine = 2.0;
  if (versine < kCoincidentTol) {
    throw DegenerateSeparation("points coincide within angular tolerance");
  }
  const double h = std::min(1.0, std::sqrt(hav));
  return EvalPoint(2 * std::asin(h), 1.0 - versine, versine);
}

}  // namespace sphgreen
