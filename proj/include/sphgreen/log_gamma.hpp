#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "sphgreen/errors.hpp"

namespace sphgreen {

/// Principal branch of log Gamma(z) for Re z > 0.
///
/// Stirling's series at |w| >= 16 after shifting w = z + n with the upward
/// recurrence; log Gamma(z) = log Gamma(z + n) - sum_k log(z + k). Each Log(z + k)
/// is continuous on the right half-plane, so the sum stays on the principal branch.
inline std::complex<double> complex_log_gamma(std::complex<double> z) {
  if (!(z.real() > 0)) throw DomainError("complex_log_gamma requires Re z > 0");

  // B_2k / (2k (2k-1)), k = 1..9
  static constexpr std::array<double, 9> kStirling = {
      1.0 / 12.0,          -1.0 / 360.0,          1.0 / 1260.0,
      -1.0 / 1680.0,       1.0 / 1188.0,          -691.0 / 360360.0,
      1.0 / 156.0,         -3617.0 / 122400.0,    43867.0 / 244188.0,
  };

  std::complex<double> shift_log(0.0, 0.0);
  std::complex<double> w = z;
  while (std::abs(w) < 16.0) {
    shift_log += std::log(w);
    w += 1.0;
  }

  const std::complex<double> inv = 1.0 / w;
  const std::complex<double> inv2 = inv * inv;
  std::complex<double> series(0.0, 0.0);
  std::complex<double> p = inv;
  for (double c : kStirling) {
    series += c * p;
    p *= inv2;
  }
  const double half_log_2pi = 0.5 * std::log(2 * std::numbers::pi);
  return (w - 0.5) * std::log(w) - w + half_log_2pi + series - shift_log;
}

}  // namespace sphgreen
