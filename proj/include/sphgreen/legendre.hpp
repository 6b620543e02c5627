#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "sphgreen/ddreal.hpp"
#include "sphgreen/errors.hpp"

namespace sphgreen {

namespace detail {

inline double magnitude(double x) noexcept { return std::abs(x); }
inline double magnitude(const DDReal& x) noexcept { return std::abs(x.hi()); }

template <class T>
void check_legendre_arg(const T& x) {
  if (magnitude(x) > 1.0 + 1e-14) {
    throw ArgOutOfRange("Legendre argument outside [-1, 1]: " +
                        std::to_string(static_cast<double>(x)));
  }
}

}  // namespace detail

/// P_0(x) .. P_L(x) for one argument.
template <class T>
struct LegendreSweep {
  T x{};
  std::vector<T> values;
};

/// Streams P_0(x), P_1(x), ... by the upward three-term recurrence
///   (l+1) P_{l+1} = (2l+1) x P_l - l P_{l-1}
/// in constant memory. degree() is the degree of value().
template <class T>
class LegendreStream {
public:
  explicit LegendreStream(T x) : x_(x), prev_(0.0), cur_(1.0) { detail::check_legendre_arg(x); }

  std::size_t degree() const noexcept { return l_; }
  const T& value() const noexcept { return cur_; }

  void advance() {
    const double l = static_cast<double>(l_);
    T next = ((x_ * cur_) * (2 * l + 1) - prev_ * l) / (l + 1);
    prev_ = cur_;
    cur_ = next;
    ++l_;
  }

private:
  T x_;
  T prev_;
  T cur_;
  std::size_t l_ = 0;
};

template <class T>
LegendreSweep<T> legendre_all(T x, std::size_t max_degree) {
  LegendreStream<T> stream(x);
  LegendreSweep<T> sweep;
  sweep.x = x;
  sweep.values.reserve(max_degree + 1);
  sweep.values.push_back(stream.value());
  for (std::size_t l = 1; l <= max_degree; ++l) {
    stream.advance();
    sweep.values.push_back(stream.value());
  }
  return sweep;
}

/// |sum_{l<=L} u^l P_l(x) - (u^2 - 2xu + 1)^{-1/2}|; |u| < 1 is required for the sum to converge.
inline double generating_function_check(double x, double u, std::size_t max_degree) {
  if (!(std::abs(u) < 1.0)) throw ArgOutOfRange("generating function needs |u| < 1");
  LegendreStream<double> stream(x);
  double sum = 1.0;
  double upow = 1.0;
  for (std::size_t l = 1; l <= max_degree; ++l) {
    stream.advance();
    upow *= u;
    sum += upow * stream.value();
  }
  return std::abs(sum - 1.0 / std::sqrt(u * u - 2 * x * u + 1));
}

/// Running maximum of |sum_{l<=n} P_l(x)| over n <= N.
inline double partial_sum_bound_scan(double x, std::size_t n_max) {
  LegendreStream<double> stream(x);
  double sum = 1.0;
  double best = 1.0;
  for (std::size_t n = 1; n <= n_max; ++n) {
    stream.advance();
    sum += stream.value();
    best = std::max(best, std::abs(sum));
  }
  return best;
}

}  // namespace sphgreen
