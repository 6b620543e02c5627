#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "sphgreen/ddreal.hpp"
#include "sphgreen/errors.hpp"
#include "sphgreen/geometry.hpp"
#include "sphgreen/legendre.hpp"

namespace sphgreen {

enum class Method { direct, split, split_dd, quadrature, closed_form };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::direct: return "direct";
    case Method::split: return "split";
    case Method::split_dd: return "split_dd";
    case Method::quadrature: return "quadrature";
    case Method::closed_form: return "closed_form";
  }
  return "unknown";
}

enum class Precision { binary64, double_double };

/// A Green's function value together with how it was obtained.
///
/// est_error is a heuristic: for series methods it is the magnitude of the
/// first omitted coefficient (times 1/4pi), not a rigorous bound.
struct GreenResult {
  double value = 0;
  Method method = Method::split;
  std::uint64_t terms_used = 1;
  double est_error = 0;
};

/// How many terms of the split sum to keep: a fixed index l' or the
/// smallest l' whose bracket coefficient falls to epsilon.
class TruncationPolicy {
public:
  enum class Mode { fixed, automatic };

  static TruncationPolicy fixed(std::uint64_t l_prime) {
    if (l_prime < 1) throw InvalidInput("fixed truncation index must be >= 1");
    return TruncationPolicy(Mode::fixed, l_prime, 0);
  }
  static TruncationPolicy automatic(double epsilon) {
    if (!(epsilon > 0)) throw InvalidInput("truncation epsilon must be > 0");
    return TruncationPolicy(Mode::automatic, 0, epsilon);
  }

  Mode mode() const noexcept { return mode_; }
  std::uint64_t l_prime() const noexcept { return l_prime_; }
  double epsilon() const noexcept { return epsilon_; }

private:
  TruncationPolicy(Mode m, std::uint64_t l, double e) : mode_(m), l_prime_(l), epsilon_(e) {}

  Mode mode_;
  std::uint64_t l_prime_;
  double epsilon_;
};

inline constexpr double kInv4Pi = 0.25 * std::numbers::inv_pi;

/// Default bracket cutoffs for automatic truncation.
inline constexpr double kDefaultEpsilonDouble = 1e-14;
inline constexpr double kDefaultEpsilonDD = 1e-18;

/// Green's function of the (unscreened) Poisson equation on the unit sphere,
/// G* = log((e/2)(1 - cos gamma)) / 4pi.
inline double g_star(const EvalPoint& p) {
  return kInv4Pi * (1.0 + std::log(0.5 * p.versine()));
}

/// G* in double-double, with log((1 - cos gamma)/2) taken to full precision.
/// The versine enters as the exact value of its double.
inline DDReal g_star_dd(const EvalPoint& p) {
  const auto& k = dd_constants();
  return (DDReal(1.0) + dd_log(DDReal(0.5 * p.versine()))) / (k.pi * 4.0);
}

/// Bracket coefficient of the split sum,
///   (2l+1)/(l(l+1)+w) - (2l+1)/(l(l+1)) = -(2l+1) w / (l(l+1) (l(l+1)+w)),
/// evaluated in the combined form, which has no cancellation.
inline double bracket_coefficient(std::uint64_t l, double w) {
  const double ld = static_cast<double>(l);
  const double n = ld * (ld + 1);
  return -(2 * ld + 1) * w / (n * (n + w));
}

inline DDReal bracket_coefficient(std::uint64_t l, const DDReal& w) {
  const double ld = static_cast<double>(l);
  const double n = ld * (ld + 1);  // exact for l < 9e7
  return -(w * (2 * ld + 1)) / ((w + n) * n);
}

/// Asymptotic count of terms for a bracket cutoff epsilon: cbrt(2 / (epsilon gamma*^2)).
inline double truncation_estimate(double epsilon, double gamma_star) {
  return std::cbrt(2.0 / (epsilon * gamma_star * gamma_star));
}

/// Smallest l' >= 1 with |bracket(l')| <= epsilon. Starts from the
/// cube-root estimate and refines against the exact coefficient, which
/// decreases monotonically in l.
inline std::uint64_t choose_truncation(double epsilon, double gamma_star) {
  if (!(epsilon > 0) || !(gamma_star > 0)) {
    throw InvalidInput("choose_truncation needs epsilon > 0 and gamma_star > 0");
  }
  const double w = 1.0 / (gamma_star * gamma_star);
  auto ok = [&](std::uint64_t l) { return std::abs(bracket_coefficient(l, w)) <= epsilon; };
  std::uint64_t hi = std::max<std::uint64_t>(
      1, static_cast<std::uint64_t>(std::ceil(truncation_estimate(epsilon, gamma_star))));
  while (!ok(hi)) hi *= 2;
  std::uint64_t lo = 0;  // invariant: !ok(lo) or lo == 0; ok(hi)
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    if (ok(mid)) hi = mid; else lo = mid;
  }
  return hi;
}

inline std::uint64_t resolve_truncation(const TruncationPolicy& policy, const ShellParams& params) {
  return policy.mode() == TruncationPolicy::Mode::fixed
             ? policy.l_prime()
             : choose_truncation(policy.epsilon(), params.gamma_star());
}

/// Truncated series -(1/4pi) sum_{l=0}^{l_trunc} (2l+1)/(l(l+1)+w) P_l(cos gamma).
inline GreenResult green_direct(const ShellParams& params, const EvalPoint& p,
                                std::uint64_t l_trunc) {
  const double w = params.w();
  LegendreStream<double> legendre(p.cos_gamma());
  double sum = 1.0 / w;
  for (std::uint64_t l = 1; l <= l_trunc; ++l) {
    legendre.advance();
    const double ld = static_cast<double>(l);
    sum += (2 * ld + 1) / (ld * (ld + 1) + w) * legendre.value();
  }
  const double next = static_cast<double>(l_trunc + 1);
  GreenResult r;
  r.value = -kInv4Pi * sum;
  r.method = Method::direct;
  r.terms_used = l_trunc + 1;
  r.est_error = kInv4Pi * (2 * next + 1) / (next * (next + 1) + w);
  return r;
}

namespace detail {

// sum_{l=1}^{l'-1} bracket(l) P_l(x)
template <class T>
T split_bracket_sum(const T& x, const T& w, std::uint64_t l_prime) {
  LegendreStream<T> legendre(x);
  T sum(0.0);
  for (std::uint64_t l = 1; l < l_prime; ++l) {
    legendre.advance();
    sum += bracket_coefficient(l, w) * legendre.value();
  }
  return sum;
}

}  // namespace detail

/// Legendre argument for double-double sums: 1 - versine, exact in
/// double-double, so the series and the logarithm see the same angle.
inline DDReal dd_cos_gamma(const EvalPoint& p) { return DDReal(1.0) - p.versine(); }

/// (R / L_d)^2 formed from the radii directly, without the double rounding of gamma*.
inline DDReal dd_screening(const ShellParams& params) {
  const DDReal radius(params.radius_km());
  const DDReal rossby(params.rossby_km());
  return (radius * radius) / (rossby * rossby);
}

/// Double-double split sum value.
inline DDReal green_split_dd_value(const ShellParams& params, const EvalPoint& p,
                                   std::uint64_t l_prime) {
  const auto& k = dd_constants();
  const DDReal w = dd_screening(params);
  const DDReal inv4pi = DDReal(1.0) / (k.pi * 4.0);
  const DDReal sum = detail::split_bracket_sum(dd_cos_gamma(p), w, l_prime);
  return -(inv4pi / w) - inv4pi * sum + g_star_dd(p);
}

/// Split (singularity-extracted) approximation
///   G_l' = -gamma*^2/4pi - (1/4pi) sum_{l=1}^{l'-1} bracket(l) P_l(cos gamma) + G*(gamma).
/// The l = 0 term is the analytic -gamma*^2/4pi.
inline GreenResult green_split(const ShellParams& params, const EvalPoint& p,
                               const TruncationPolicy& policy,
                               Precision precision = Precision::binary64) {
  const std::uint64_t l_prime = resolve_truncation(policy, params);
  GreenResult r;
  r.terms_used = l_prime;
  r.est_error = kInv4Pi * std::abs(bracket_coefficient(l_prime, params.w()));
  if (precision == Precision::double_double) {
    r.value = dd_to_double(green_split_dd_value(params, p, l_prime));
    r.method = Method::split_dd;
  } else {
    const double w = params.w();
    const double sum = detail::split_bracket_sum(p.cos_gamma(), w, l_prime);
    r.value = -kInv4Pi / w - kInv4Pi * sum + g_star(p);
    r.method = Method::split;
  }
  return r;
}

/// Double-precision split sum with the truncation, bracket coefficients and
/// recurrence factors tabulated once. For evaluating many angles at one L_d.
class SplitKernel {
public:
  SplitKernel(const ShellParams& params, const TruncationPolicy& policy)
      : l_prime_(resolve_truncation(policy, params)), w_(params.w()) {
    coeff_.resize(l_prime_);
    up_.resize(l_prime_);
    down_.resize(l_prime_);
    for (std::uint64_t l = 1; l < l_prime_; ++l) {
      const double ld = static_cast<double>(l);
      coeff_[l] = bracket_coefficient(l, w_);
      up_[l] = (2 * ld + 1) / (ld + 1);
      down_[l] = ld / (ld + 1);
    }
    est_error_ = kInv4Pi * std::abs(bracket_coefficient(l_prime_, w_));
  }

  std::uint64_t terms() const noexcept { return l_prime_; }

  /// G - G* at gamma -> 0: -gamma*^2/4pi - (1/4pi) sum bracket(l), since P_l(1) = 1.
  double regular_part_at_zero() const noexcept {
    double s = 0;
    for (std::uint64_t l = 1; l < l_prime_; ++l) s += coeff_[l];
    return -kInv4Pi / w_ - kInv4Pi * s;
  }

  double value(const EvalPoint& p) const noexcept { return regular_part(p) + g_star(p); }

  /// G - G*, summed without the logarithmic part.
  double regular_part(const EvalPoint& p) const noexcept {
    const double x = p.cos_gamma();
    double prev = 1.0, cur = x, sum = 0;
    for (std::uint64_t l = 1; l < l_prime_; ++l) {
      sum += coeff_[l] * cur;
      const double next = up_[l] * x * cur - down_[l] * prev;
      prev = cur;
      cur = next;
    }
    return -kInv4Pi / w_ - kInv4Pi * sum;
  }

  /// regular_part for many cosines at once; bit-identical to the scalar version.
  /// Runs kLanes recurrences side by side so their latencies overlap.
  void regular_part_batch(const std::vector<double>& cos_gamma, std::vector<double>& out) const {
    constexpr std::size_t kLanes = 8;
    out.resize(cos_gamma.size());
    for (std::size_t base = 0; base < cos_gamma.size(); base += kLanes) {
      const std::size_t n = std::min(kLanes, cos_gamma.size() - base);
      std::array<double, kLanes> x{}, prev{}, cur{}, sum{};
      for (std::size_t k = 0; k < n; ++k) x[k] = cos_gamma[base + k];
      for (std::size_t k = 0; k < kLanes; ++k) {
        prev[k] = 1.0;
        cur[k] = x[k];
      }
      for (std::uint64_t l = 1; l < l_prime_; ++l) {
        const double c = coeff_[l], u = up_[l], d = down_[l];
        for (std::size_t k = 0; k < kLanes; ++k) {
          sum[k] += c * cur[k];
          const double next = u * x[k] * cur[k] - d * prev[k];
          prev[k] = cur[k];
          cur[k] = next;
        }
      }
      for (std::size_t k = 0; k < n; ++k) out[base + k] = -kInv4Pi / w_ - kInv4Pi * sum[k];
    }
  }

  GreenResult operator()(const EvalPoint& p) const noexcept {
    return {value(p), Method::split, l_prime_, est_error_};
  }

private:
  std::uint64_t l_prime_;
  double w_;
  double est_error_ = 0;
  std::vector<double> coeff_, up_, down_;
};

struct ErrorSample {
  std::uint64_t l = 0;
  double error = 0;     // E(l) = |G_ref - G_l|
  double envelope = 0;  // max of E over the degrees since the previous sample
};

struct ErrorCurve {
  double reference = 0;
  std::uint64_t reference_terms = 0;
  std::vector<ErrorSample> samples;
};

struct ErrorCurveOptions {
  /// Bracket cutoff for the converged reference.
  double reference_epsilon = 1e-30;
  /// Cap on the reference truncation, as a multiple of l_max.
  std::uint64_t reference_factor = 64;
  int points_per_decade = 20;
};

/// Absolute error E(l) = |G_ref - G_l| of the split sum for l = 1 .. l_max,
/// reported on log-spaced degrees. All sums are in double-double. The
/// reference uses the smaller of the epsilon-driven truncation and
/// reference_factor * l_max terms.
inline ErrorCurve error_curve(const ShellParams& params, const EvalPoint& p, std::uint64_t l_max,
                              const ErrorCurveOptions& opts = {}) {
  if (l_max < 2) throw InvalidInput("error curve needs l_max >= 2");
  const std::uint64_t by_eps = choose_truncation(opts.reference_epsilon, params.gamma_star());
  const std::uint64_t l_ref =
      std::max(l_max, std::min(by_eps, opts.reference_factor * l_max));

  const DDReal w = dd_screening(params);

  // partial[l] = sum_{k=1}^{l-1} bracket(k) P_k, i.e. the sum inside G_l.
  std::vector<DDReal> partial(l_max + 1);
  LegendreStream<DDReal> legendre(dd_cos_gamma(p));
  DDReal sum(0.0);
  if (l_max >= 1) partial[1] = sum;
  for (std::uint64_t l = 1; l < l_ref; ++l) {
    legendre.advance();
    sum += bracket_coefficient(l, w) * legendre.value();
    if (l + 1 <= l_max) partial[l + 1] = sum;
  }

  ErrorCurve curve;
  curve.reference_terms = l_ref;
  const auto& k = dd_constants();
  const DDReal inv4pi = DDReal(1.0) / (k.pi * 4.0);
  curve.reference = dd_to_double(-(inv4pi / w) - inv4pi * sum + g_star_dd(p));

  std::vector<std::uint64_t> degrees;
  const double decades = std::log10(static_cast<double>(l_max));
  const int n_points = static_cast<int>(std::ceil(decades * opts.points_per_decade));
  for (int i = 0; i <= n_points; ++i) {
    const double l = std::pow(10.0, decades * i / std::max(1, n_points));
    const auto li = std::clamp<std::uint64_t>(static_cast<std::uint64_t>(std::llround(l)), 1, l_max);
    if (degrees.empty() || li > degrees.back()) degrees.push_back(li);
  }
  if (degrees.back() != l_max) degrees.push_back(l_max);

  auto err_at = [&](std::uint64_t l) { return dd_to_double(abs(sum - partial[l]) * inv4pi); };
  std::uint64_t prev = 0;
  for (std::uint64_t l : degrees) {
    double env = 0;
    for (std::uint64_t j = prev + 1; j <= l; ++j) env = std::max(env, err_at(j));
    curve.samples.push_back({l, err_at(l), env});
    prev = l;
  }
  return curve;
}

/// Least-squares slope of log(envelope) against log(l) over samples with l in [l_lo, l_hi].
inline double fit_loglog_slope(const ErrorCurve& curve, std::uint64_t l_lo, std::uint64_t l_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& s : curve.samples) {
    if (s.l < l_lo || s.l > l_hi || !(s.envelope > 0)) continue;
    const double x = std::log(static_cast<double>(s.l));
    const double y = std::log(s.envelope);
    sx += x; sy += y; sxx += x * x; sxy += x * y;
    ++n;
  }
  if (n < 2) throw InvalidInput("slope fit needs at least two samples in range");
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace sphgreen
