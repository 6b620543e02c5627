#pragma once

#include <cmath>
#include <ostream>
#include <string>

#include "sphgreen/errors.hpp"

namespace sphgreen {

namespace eft {

// Error-free transformations. Results satisfy s + e == a + b (resp. a * b) exactly.

inline void two_sum(double a, double b, double& s, double& e) noexcept {
  s = a + b;
  const double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

// Requires |a| >= |b| or a == 0.
inline void quick_two_sum(double a, double b, double& s, double& e) noexcept {
  s = a + b;
  e = b - (s - a);
}

inline void two_prod(double a, double b, double& p, double& e) noexcept {
  p = a * b;
  e = std::fma(a, b, -p);
}

}  // namespace eft

/// Double-double real: the unevaluated sum hi + lo with |lo| <= ulp(hi)/2.
///
/// Gives roughly 31 significant digits, enough to keep the split Legendre sum
/// accurate when its O(1) terms cancel down to 1e-15 and below.
class DDReal {
public:
  constexpr DDReal() = default;
  constexpr DDReal(double x) noexcept : hi_(x), lo_(0) {}  // NOLINT: implicit promotion is exact

  /// Builds a value from a pair, renormalising it.
  static DDReal from_pair(double hi, double lo) noexcept {
    DDReal r;
    eft::quick_two_sum(hi, lo, r.hi_, r.lo_);
    return r;
  }

  constexpr double hi() const noexcept { return hi_; }
  constexpr double lo() const noexcept { return lo_; }
  explicit constexpr operator double() const noexcept { return hi_ + lo_; }

  DDReal operator-() const noexcept { return raw(-hi_, -lo_); }

  friend DDReal operator+(const DDReal& a, const DDReal& b) noexcept {
    double s, e, t, f;
    eft::two_sum(a.hi_, b.hi_, s, e);
    eft::two_sum(a.lo_, b.lo_, t, f);
    e += t;
    eft::quick_two_sum(s, e, s, e);
    e += f;
    eft::quick_two_sum(s, e, s, e);
    return raw(s, e);
  }

  friend DDReal operator+(const DDReal& a, double b) noexcept {
    double s, e;
    eft::two_sum(a.hi_, b, s, e);
    e += a.lo_;
    eft::quick_two_sum(s, e, s, e);
    return raw(s, e);
  }
  friend DDReal operator+(double a, const DDReal& b) noexcept { return b + a; }

  friend DDReal operator-(const DDReal& a, const DDReal& b) noexcept { return a + (-b); }
  friend DDReal operator-(const DDReal& a, double b) noexcept { return a + (-b); }
  friend DDReal operator-(double a, const DDReal& b) noexcept { return (-b) + a; }

  friend DDReal operator*(const DDReal& a, const DDReal& b) noexcept {
    double p, e;
    eft::two_prod(a.hi_, b.hi_, p, e);
    e += a.hi_ * b.lo_ + a.lo_ * b.hi_;
    eft::quick_two_sum(p, e, p, e);
    return raw(p, e);
  }

  friend DDReal operator*(const DDReal& a, double b) noexcept {
    double p, e;
    eft::two_prod(a.hi_, b, p, e);
    e += a.lo_ * b;
    eft::quick_two_sum(p, e, p, e);
    return raw(p, e);
  }
  friend DDReal operator*(double a, const DDReal& b) noexcept { return b * a; }

  /// Long division with two correction steps. Throws DivByZero for b == 0.
  friend DDReal operator/(const DDReal& a, const DDReal& b) {
    if (b.hi_ == 0.0) throw DivByZero("double-double division by zero");
    const double q1 = a.hi_ / b.hi_;
    DDReal r = a - b * q1;
    const double q2 = r.hi_ / b.hi_;
    r = r - b * q2;
    const double q3 = r.hi_ / b.hi_;
    DDReal q = from_pair(q1, q2);
    return q + q3;
  }

  friend DDReal operator/(const DDReal& a, double b) {
    if (b == 0.0) throw DivByZero("double-double division by zero");
    const double q1 = a.hi_ / b;
    double p, e;
    eft::two_prod(q1, b, p, e);
    double s, f;
    eft::two_sum(a.hi_, -p, s, f);
    f -= e;
    f += a.lo_;
    const double q2 = (s + f) / b;
    return from_pair(q1, q2);
  }

  DDReal& operator+=(const DDReal& b) noexcept { return *this = *this + b; }
  DDReal& operator+=(double b) noexcept { return *this = *this + b; }
  DDReal& operator-=(const DDReal& b) noexcept { return *this = *this - b; }
  DDReal& operator*=(const DDReal& b) noexcept { return *this = *this * b; }
  DDReal& operator*=(double b) noexcept { return *this = *this * b; }
  DDReal& operator/=(const DDReal& b) { return *this = *this / b; }
  DDReal& operator/=(double b) { return *this = *this / b; }

  friend bool operator==(const DDReal& a, const DDReal& b) noexcept {
    return a.hi_ == b.hi_ && a.lo_ == b.lo_;
  }
  friend bool operator<(const DDReal& a, const DDReal& b) noexcept {
    return a.hi_ < b.hi_ || (a.hi_ == b.hi_ && a.lo_ < b.lo_);
  }
  friend bool operator>(const DDReal& a, const DDReal& b) noexcept { return b < a; }

  friend std::ostream& operator<<(std::ostream& os, const DDReal& x) {
    return os << '(' << x.hi_ << " + " << x.lo_ << ')';
  }

private:
  static constexpr DDReal raw(double hi, double lo) noexcept {
    DDReal r;
    r.hi_ = hi;
    r.lo_ = lo;
    return r;
  }

  double hi_ = 0;
  double lo_ = 0;
};

inline DDReal dd_from_double(double x) noexcept { return DDReal(x); }
inline double dd_to_double(const DDReal& a) noexcept { return static_cast<double>(a); }
inline DDReal dd_add(const DDReal& a, const DDReal& b) noexcept { return a + b; }
inline DDReal dd_mul(const DDReal& a, const DDReal& b) noexcept { return a * b; }
inline DDReal dd_div(const DDReal& a, const DDReal& b) { return a / b; }
inline DDReal abs(const DDReal& a) noexcept { return a.hi() < 0 ? -a : a; }

struct DDConstants {
  DDReal log2;
  DDReal pi;
  /// log(e/2) = 1 - log 2, the additive constant of the Poisson kernel.
  DDReal e_half_log_aux;
};

/// Two-double roundings of ln 2 and pi (hi = nearest double, lo = nearest double of the rest).
inline const DDConstants& dd_constants() {
  static const DDConstants c = [] {
    DDConstants k;
    k.log2 = DDReal::from_pair(6.931471805599452862e-01, 2.319046813846299558e-17);
    k.pi = DDReal::from_pair(3.141592653589793116e+00, 1.224646799147353207e-16);
    k.e_half_log_aux = DDReal(1.0) - k.log2;
    return k;
  }();
  return c;
}

/// Natural logarithm of a positive double-double.
///
/// a = m 2^k with m in [1/sqrt2, sqrt2), then log m = 2 atanh t, t = (m-1)/(m+1),
/// summed until the terms drop below 1e-33 of the result (|t| <= 0.172).
inline DDReal dd_log(const DDReal& a) {
  if (!(a.hi() > 0)) throw DomainError("dd_log of a non-positive value");
  int k = 0;
  std::frexp(a.hi(), &k);  // a.hi = f 2^k, f in [0.5, 1)
  DDReal m = a * std::ldexp(1.0, -k);
  if (m.hi() < 0.70710678118654752) {
    m = m * 2.0;
    --k;
  }
  const DDReal t = (m - 1.0) / (m + 1.0);
  const DDReal t2 = t * t;
  DDReal power = t;
  DDReal series = t;
  for (int n = 3; n < 200; n += 2) {
    power *= t2;
    const DDReal term = power / static_cast<double>(n);
    series += term;
    if (std::abs(term.hi()) < 1e-34 * std::abs(series.hi()) || term.hi() == 0.0) break;
  }
  return dd_constants().log2 * static_cast<double>(k) + series * 2.0;
}

}  // namespace sphgreen
