#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sphgreen/errors.hpp"
#include "sphgreen/geometry.hpp"
#include "sphgreen/log_gamma.hpp"
#include "sphgreen/series.hpp"

namespace sphgreen {

struct QuadratureSpec {
  double rel_tol = 1e-13;
  double abs_tol = 1e-18;
  /// Upper end of the truncated z axis. Derived from abs_tol when unset.
  std::optional<double> z_cut;
  std::size_t max_subdiv = 200000;
};

namespace detail {

// 15-point Kronrod rule with its embedded 7-point Gauss rule (QUADPACK qk15).
inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a = 0, b = 0;
  double result = 0;
  double error = 0;     // estimate, floored at the roundoff level
  double excess = 0;    // estimate above the roundoff floor; 0 once converged
  double abs_integral = 0;
};

template <class F>
Panel gauss_kronrod15(const F& f, double a, double b) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, 15> fv{};
  fv[7] = f(center);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    fv[j] = f(center - dx);
    fv[14 - j] = f(center + dx);
  }
  double resk = fv[7] * kWgk[7];
  double resg = fv[7] * kWg[3];
  double resabs = std::abs(resk);
  for (int j = 0; j < 7; ++j) {
    const double pair = fv[j] + fv[14 - j];
    resk += kWgk[j] * pair;
    resabs += kWgk[j] * (std::abs(fv[j]) + std::abs(fv[14 - j]));
    if (j % 2 == 1) resg += kWg[j / 2] * pair;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[7] * std::abs(fv[7] - mean);
  for (int j = 0; j < 7; ++j) {
    resasc += kWgk[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  }
  resk *= half;
  resg *= half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);

  double err = std::abs(resk - resg);
  if (resasc != 0 && err != 0) err = resasc * std::min(1.0, std::pow(200 * err / resasc, 1.5));
  const double floor = 50 * eps * resabs;

  Panel p;
  p.a = a;
  p.b = b;
  p.result = resk;
  p.excess = err > floor ? err : 0.0;
  p.error = std::max(err, floor);
  p.abs_integral = resabs;
  return p;
}

inline bool panel_less(const Panel& x, const Panel& y) { return x.excess < y.excess; }

// Neumaier-compensated sum of panel results.
inline double compensated_total(const std::vector<Panel>& panels) {
  double sum = 0, comp = 0;
  for (const auto& p : panels) {
    const double t = sum + p.result;
    comp += std::abs(sum) >= std::abs(p.result) ? (sum - t) + p.result : (p.result - t) + sum;
    sum = t;
  }
  return sum + comp;
}

}  // namespace detail

/// Outcome of the panel integration.
struct AdaptiveResult {
  double value = 0;
  double error = 0;
  std::size_t panels = 0;
  bool roundoff_limited = false;
};

/// Globally adaptive Gauss-Kronrod integration over the given breakpoints.
/// The panel with the largest error estimate is bisected until the summed
/// estimate meets max(abs_tol, rel_tol |I|) or every panel is at its roundoff
/// floor. Throws NoConvergence if max_panels (initial panels included) is exceeded first.
template <class F>
AdaptiveResult integrate_adaptive(const F& f, const std::vector<double>& breakpoints,
                                  double abs_tol, double rel_tol, std::size_t max_panels) {
  std::vector<detail::Panel> heap;
  heap.reserve(breakpoints.size() * 2);
  double total = 0, total_err = 0;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    heap.push_back(detail::gauss_kronrod15(f, breakpoints[i], breakpoints[i + 1]));
    total += heap.back().result;
    total_err += heap.back().excess;
  }
  std::make_heap(heap.begin(), heap.end(), detail::panel_less);
  if (heap.size() > max_panels) {
    throw NoConvergence("adaptive quadrature needs " + std::to_string(heap.size()) +
                        " initial panels, more than the budget of " + std::to_string(max_panels));
  }

  AdaptiveResult out;
  while (true) {
    if (total_err <= std::max(abs_tol, rel_tol * std::abs(total))) break;
    if (heap.front().excess == 0.0) {
      out.roundoff_limited = true;
      break;
    }
    if (heap.size() >= max_panels) {
      throw NoConvergence("adaptive quadrature exceeded " + std::to_string(max_panels) +
                          " panels (error estimate " + std::to_string(total_err) + ")");
    }
    std::pop_heap(heap.begin(), heap.end(), detail::panel_less);
    const detail::Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      out.roundoff_limited = true;
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end(), detail::panel_less);
      break;
    }
    auto left = detail::gauss_kronrod15(f, worst.a, mid);
    auto right = detail::gauss_kronrod15(f, mid, worst.b);
    total += left.result + right.result - worst.result;
    total_err += left.excess + right.excess - worst.excess;
    heap.push_back(left);
    std::push_heap(heap.begin(), heap.end(), detail::panel_less);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), detail::panel_less);
  }

  out.value = detail::compensated_total(heap);
  double est = 0, abs_sum = 0;
  for (const auto& p : heap) {
    est += p.excess;
    abs_sum += p.abs_integral;
  }
  out.error = est + std::numeric_limits<double>::epsilon() * abs_sum;
  out.panels = heap.size();
  return out;
}

/// Bound on |(1/2pi) int_{z_cut}^inf e^{-z/2} cos(beta z) / D(z) dz| using D(z) >= 1 - e^{-z}.
inline double quadrature_tail_bound(double z_cut) {
  return std::numbers::inv_pi * std::exp(-0.5 * z_cut) / -std::expm1(-z_cut);
}

/// Smallest convenient z_cut with quadrature_tail_bound(z_cut) <= abs_tol.
inline double quadrature_z_cut(double abs_tol) {
  double z = 2.0 * std::log(1.0 / (std::numbers::pi * abs_tol));
  z = std::max(z, 1.0);
  while (quadrature_tail_bound(z) > abs_tol) z += 0.5;
  return z;
}

/// G = -(1/2pi) int_0^inf e^{-z/2} cos(beta z) / sqrt(e^{-2z} - 2 e^{-z} cos(gamma) + 1) dz.
///
/// The root is evaluated as sqrt((1 - e^{-z})^2 + 2 e^{-z} (1 - cos gamma)), which
/// keeps its digits for small z and small gamma. Panels are at most a quarter
/// period of cos(beta z) wide and graded geometrically towards z = 0 on the
/// scale of gamma, where the integrand peaks.
inline GreenResult green_quadrature(const ShellParams& params, const EvalPoint& p,
                                    const QuadratureSpec& spec = {}) {
  if (!(spec.rel_tol > 0) || !(spec.abs_tol > 0)) {
    throw InvalidInput("quadrature tolerances must be positive");
  }
  if (spec.z_cut && !(*spec.z_cut > 0)) throw InvalidInput("z_cut must be positive");
  const double beta = params.beta();
  const double versine = p.versine();
  const double z_cut = spec.z_cut ? *spec.z_cut : quadrature_z_cut(spec.abs_tol);

  auto integrand = [beta, versine](double z) {
    const double e = std::exp(-z);
    const double om = -std::expm1(-z);
    return std::exp(-0.5 * z) * std::cos(beta * z) / std::sqrt(om * om + 2 * e * versine);
  };

  const double width = std::min(0.25 * std::numbers::pi / beta, 0.5);
  std::vector<double> bp{0.0};
  const double scale = std::sqrt(versine);
  for (double s = scale / 8; s < width; s *= 2) {
    if (s < z_cut) bp.push_back(s);
  }
  for (double z = bp.back() + width; z < z_cut; z += width) bp.push_back(z);
  if (z_cut - bp.back() < 0.25 * width && bp.size() > 1) bp.back() = z_cut;
  else bp.push_back(z_cut);

  // The integral is scaled by -1/2pi; tolerances are on G.
  const double scale_out = 0.5 * std::numbers::inv_pi;
  const double tail = quadrature_tail_bound(z_cut);
  auto res = integrate_adaptive(integrand, bp, spec.abs_tol / scale_out, spec.rel_tol,
                                spec.max_subdiv);

  GreenResult r;
  r.value = -scale_out * res.value;
  r.method = Method::quadrature;
  r.terms_used = res.panels;
  r.est_error = scale_out * res.error + tail;
  return r;
}

/// -1/(4 cosh(pi beta)) written as -e^{-pi beta} / (2 (1 + e^{-2 pi beta})); no overflow for large beta.
inline double antipode_closed_form(double beta) {
  const double e = std::exp(-std::numbers::pi * beta);
  return -e / (2 * (1 + e * e));
}

/// G at cos(gamma) = -1.
inline double green_antipode(const ShellParams& params) { return antipode_closed_form(params.beta()); }

/// G at cos(gamma) = 0: -|Gamma(1/4 + i beta/2)|^2 / (8 pi^{3/2}).
inline double equator_closed_form(double beta) {
  const auto lg = complex_log_gamma({0.25, 0.5 * beta});
  const double pi = std::numbers::pi;
  return -std::exp(2 * lg.real()) / (8 * pi * std::sqrt(pi));
}

inline double green_equator(const ShellParams& params) { return equator_closed_form(params.beta()); }

}  // namespace sphgreen
