#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "sphgreen/series.hpp"

using namespace sphgreen;
constexpr double pi = std::numbers::pi;

namespace {
const ShellParams kEarth1000 = make_params(6371.0, 1000.0);

double rel(double got, double want) { return std::abs(got / want - 1.0); }
}  // namespace

TEST(GStar, ClosedFormValues) {
  EXPECT_NEAR(g_star(EvalPoint::from_angle(pi)), 1.0 / (4 * pi), 1e-17);
  EXPECT_NEAR(g_star(EvalPoint::from_angle(pi)), 0.0795775, 5e-8);
  EXPECT_NEAR(g_star(EvalPoint::from_cos(0.0)), (1 - std::log(2.0)) / (4 * pi), 1e-17);
  EXPECT_NEAR(g_star(EvalPoint::from_cos(0.0)), 0.0244186, 5e-8);
  EXPECT_NEAR(dd_to_double(g_star_dd(EvalPoint::from_cos(0.0))), (1 - std::log(2.0)) / (4 * pi), 1e-17);
  EXPECT_THROW(g_star(EvalPoint::from_angle(1e-9)), Singular);
}

TEST(GStar, GrowsWithoutBoundTowardsZero) {
  double prev = g_star(EvalPoint::from_angle(1e-1));
  for (double g : {1e-2, 1e-3, 1e-4, 1e-6}) {
    const double v = g_star(EvalPoint::from_angle(g));
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(Direct, SingleTerm) {
  for (double g : {0.1, 1.0, pi}) {
    const auto r = green_direct(kEarth1000, EvalPoint::from_angle(g), 0);
    EXPECT_DOUBLE_EQ(r.value, -kEarth1000.gamma_star() * kEarth1000.gamma_star() / (4 * pi));
    EXPECT_EQ(r.terms_used, 1u);
    EXPECT_EQ(r.method, Method::direct);
  }
}

TEST(Direct, ApproachesTableValueAtGammaStar) {
  const auto p = EvalPoint::from_ratio(1.0, kEarth1000);
  const double want = -6.7542925347032642e-2;
  const double e1 = std::abs(green_direct(kEarth1000, p, 20000).value - want);
  const double e2 = std::abs(green_direct(kEarth1000, p, 400000).value - want);
  EXPECT_LT(e2, 2e-5);
  EXPECT_LT(e2, e1);
}

TEST(Direct, OscillatesAroundAntipodeValue) {
  // Partial sums at gamma = pi alternate about the closed-form value with a shrinking envelope.
  const auto p = EvalPoint::from_cos(-1.0);
  const double g = -1.0797889398916860e-9;
  double env_prev = INFINITY;
  for (std::uint64_t n : {1000u, 10000u, 100000u}) {
    const double a = green_direct(kEarth1000, p, n).value - g;
    const double b = green_direct(kEarth1000, p, n + 1).value - g;
    EXPECT_LT(a * b, 0.0) << n;
    const double env = std::max(std::abs(a), std::abs(b));
    EXPECT_LT(env, env_prev);
    env_prev = env;
  }
}

TEST(Split, TableOneRows) {
  const auto r1 = green_split(kEarth1000, EvalPoint::from_ratio(1.0, kEarth1000),
                              TruncationPolicy::automatic(kDefaultEpsilonDD), Precision::double_double);
  EXPECT_LT(rel(r1.value, -6.7542925347032642e-2), 5e-13);
  EXPECT_EQ(r1.method, Method::split_dd);
  EXPECT_GT(r1.est_error, 0.0);
  EXPECT_LT(r1.est_error, 1e-18);

  const auto r10 = green_split(kEarth1000, EvalPoint::from_ratio(10.0, kEarth1000),
                               TruncationPolicy::automatic(kDefaultEpsilonDD), Precision::double_double);
  EXPECT_LT(rel(r10.value, -3.7116859762750061e-6), 5e-13);
}

TEST(Split, AntipodeDoubleDouble) {
  const auto r = green_split(kEarth1000, EvalPoint::from_cos(-1.0),
                             TruncationPolicy::automatic(kDefaultEpsilonDD), Precision::double_double);
  // Tabulated split value; it sits 4e-18 from the closed form, ours sits closer.
  EXPECT_LT(rel(r.value, -1.0797889438705467e-9), 1e-8);
  EXPECT_LT(rel(r.value, -1.0797889398916860e-9), 1e-9);
}

TEST(Split, DegenerateTruncation) {
  for (double g : {0.05, 1.0, pi}) {
    const auto p = EvalPoint::from_angle(g);
    const auto r = green_split(kEarth1000, p, TruncationPolicy::fixed(1));
    const double gs2 = kEarth1000.gamma_star() * kEarth1000.gamma_star();
    EXPECT_DOUBLE_EQ(r.value, -gs2 / (4 * pi) + g_star(p));
    EXPECT_EQ(r.terms_used, 1u);
  }
}

TEST(Split, PolicyValidation) {
  EXPECT_THROW(TruncationPolicy::fixed(0), InvalidInput);
  EXPECT_THROW(TruncationPolicy::automatic(0.0), InvalidInput);
  EXPECT_THROW(TruncationPolicy::automatic(-1.0), InvalidInput);
  EXPECT_THROW(green_split(kEarth1000, EvalPoint::from_angle(1e-12), TruncationPolicy::fixed(5)),
               DegenerateSeparation);
}

TEST(Truncation, EstimateAndRefinement) {
  const double e1 = truncation_estimate(1e-12, 0.15696123);
  EXPECT_NEAR(e1, 43300, 100);
  const double e2 = truncation_estimate(1e-12, 0.015696);
  EXPECT_NEAR(e2, 201000, 1000);
  EXPECT_NEAR(e2 / e1, std::cbrt(100.0), 1e-3);

  for (double gs : {0.015696, 0.15696123, 0.5}) {
    for (double eps : {1e-6, 1e-10, 1e-14}) {
      const auto l = choose_truncation(eps, gs);
      const double w = 1 / (gs * gs);
      EXPECT_LE(std::abs(bracket_coefficient(l, w)), eps);
      if (l > 1) {
        EXPECT_GT(std::abs(bracket_coefficient(l - 1, w)), eps);
      }
      EXPECT_NEAR(static_cast<double>(l) / truncation_estimate(eps, gs), 1.0, 0.1);
    }
  }
  EXPECT_EQ(choose_truncation(10.0, 0.5), 1u);
  EXPECT_THROW(choose_truncation(0.0, 0.5), InvalidInput);
}

TEST(SeriesProperty, NegativityOverResolvableRange) {
  // The double-precision split sum resolves G down to ~1e-16 absolute; beyond
  // gamma ~ 20 gamma* the true value is below that for the smaller L_d.
  for (double ld : {50.0, 100.0, 300.0, 1000.0, 2000.0}) {
    const auto params = make_params(6371.0, ld);
    const SplitKernel kernel(params, TruncationPolicy::automatic(kDefaultEpsilonDouble));
    const double hi = std::min(pi, 20 * params.gamma_star());
    for (int i = 0; i < 200; ++i) {
      const double g = 1e-3 + (hi - 1e-3) * (i + 1) / 200.0;
      EXPECT_LT(kernel.value(EvalPoint::from_angle(g)), 0.0) << ld << " " << g;
    }
  }
}

TEST(SeriesProperty, SplitMatchesDirectAtEqualTruncation) {
  // direct_N - split_N is exactly the Poisson-series remainder that the split form
  // sums in closed form: (1/4pi)(sum_{l>=N} c_l P_l - a_N P_N), c_l = (2l+1)/(l(l+1)).
  const std::uint64_t n = 200000;
  for (double ld : {300.0, 1000.0, 2000.0}) {
    const auto params = make_params(6371.0, ld);
    for (double c : {0.99, 0.9, 0.5, 0.0, -0.7, -1.0}) {
      const auto p = EvalPoint::from_cos(c);
      const double direct = green_direct(params, p, n).value;
      const double split = green_split(params, p, TruncationPolicy::fixed(n)).value;
      LegendreStream<double> leg(c);
      double head = 0;
      for (std::uint64_t l = 1; l < n; ++l) {
        leg.advance();
        head += (2.0 * l + 1) / (static_cast<double>(l) * (l + 1)) * leg.value();
      }
      leg.advance();
      const double nd = static_cast<double>(n);
      const double tail = -4 * pi * g_star(p) - head;
      const double a_n = (2 * nd + 1) / (nd * (nd + 1) + params.w());
      const double predicted = kInv4Pi * (tail - a_n * leg.value());
      // Floor: roundoff of 2e5 partial sums of O(1) terms in double.
      EXPECT_LE(std::abs((direct - split) - predicted), std::max(1e-10 * std::abs(split), 1e-13)) << ld << " " << c;
    }
  }
}

TEST(SeriesProperty, DoubleAgreesWithDoubleDouble) {
  for (double ld : {300.0, 1000.0, 2000.0}) {
    const auto params = make_params(6371.0, ld);
    const auto policy = TruncationPolicy::automatic(1e-16);
    for (double ratio : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0}) {
      const auto p = EvalPoint::from_ratio(ratio, params);
      const double d = green_split(params, p, policy, Precision::binary64).value;
      const double q = green_split(params, p, policy, Precision::double_double).value;
      // Double loses the cancellation against G*, so digits track |G| / |G*|; the
      // sums run to ~2e6 terms at L_d = 300.
      const double scale = std::abs(g_star(p)) + std::abs(q);
      EXPECT_LE(std::abs(d - q), 5e-14 * scale) << ld << " " << ratio;
      if (std::abs(q) >= 1e-3) {
        EXPECT_LE(rel(d, q), 1e-12) << ld << " " << ratio;
      }
    }
  }
}

TEST(SeriesProperty, BracketTail) {
  for (double gs : {0.05, 0.15696123, 0.3}) {
    const double w = 1 / (gs * gs);
    double prev = INFINITY;
    for (std::uint64_t l = 1; l < 200000; l = l < 100 ? l + 1 : l * 11 / 10) {
      const double b = std::abs(bracket_coefficient(l, w));
      EXPECT_LT(b, prev);
      prev = b;
    }
    double last_gap = INFINITY;
    for (std::uint64_t l : {1000u, 10000u, 100000u, 1000000u}) {
      const double ld = static_cast<double>(l);
      const double r = bracket_coefficient(l, w) * ld * ld * ld * gs * gs / -2.0;
      const double gap = std::abs(r - 1.0);
      EXPECT_LT(gap, last_gap);
      last_gap = gap;
    }
    EXPECT_LT(last_gap, 1e-4);
  }
  // dd and double coefficients agree.
  for (std::uint64_t l : {1u, 7u, 1000u}) {
    EXPECT_NEAR(dd_to_double(bracket_coefficient(l, DDReal(40.0))), bracket_coefficient(l, 40.0),
                1e-16 * std::abs(bracket_coefficient(l, 40.0)));
  }
}

TEST(SeriesProperty, DependsOnlyOnAngle) {
  const auto policy = TruncationPolicy::automatic(1e-12);
  const auto a = central_angle({0.3, 0.1}, {0.9, 0.1});
  const auto b = central_angle({0.3, 1.7}, {0.9, 1.7});
  const auto c = central_angle({0.9, 4.0}, {0.3, 4.0});
  EXPECT_EQ(green_split(kEarth1000, a, policy).value, green_split(kEarth1000, b, policy).value);
  EXPECT_EQ(green_split(kEarth1000, a, policy).value, green_split(kEarth1000, c, policy).value);
  const auto n1 = central_angle({0.0, 0.0}, {1.2, 0.4});
  const auto n2 = central_angle({0.0, 2.0}, {1.2, 5.0});
  EXPECT_EQ(green_split(kEarth1000, n1, policy).value, green_split(kEarth1000, n2, policy).value);
}

TEST(SeriesProperty, LocalizationAtTenGammaStar) {
  const auto p = EvalPoint::from_ratio(10.0, kEarth1000);
  const double g = green_split(kEarth1000, p, TruncationPolicy::automatic(kDefaultEpsilonDouble)).value;
  EXPECT_LE(std::abs(g), 1e-3 * std::abs(g_star(p)));
}

TEST(SplitKernelTest, MatchesGreenSplit) {
  const auto policy = TruncationPolicy::automatic(1e-13);
  const SplitKernel k(kEarth1000, policy);
  EXPECT_EQ(k.terms(), choose_truncation(1e-13, kEarth1000.gamma_star()));
  for (double g : {0.01, 0.2, 1.5, pi}) {
    const auto p = EvalPoint::from_angle(g);
    const double want = green_split(kEarth1000, p, policy).value;
    EXPECT_NEAR(k.value(p), want, 1e-15);
    EXPECT_EQ(k(p).terms_used, k.terms());
  }
  // G - G* tends to the regular part as gamma -> 0.
  const auto tiny = EvalPoint::from_angle(1e-7);
  EXPECT_NEAR(k.regular_part(tiny), k.regular_part_at_zero(), 1e-10);
  EXPECT_NEAR(k.value(tiny) - g_star(tiny), k.regular_part(tiny), 1e-14);
}

TEST(SplitKernelTest, BatchIsBitIdentical) {
  const SplitKernel k(kEarth1000, TruncationPolicy::automatic(1e-10));
  std::vector<double> x;
  for (int i = 0; i < 21; ++i) x.push_back(-1.0 + i / 10.0 - (i == 20 ? 1e-9 : 0.0));
  std::vector<double> out;
  k.regular_part_batch(x, out);
  ASSERT_EQ(out.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(out[i], k.regular_part(EvalPoint::from_cos(x[i]))) << x[i];
}

TEST(ErrorCurveTest, SelfComparisonIsZero) {
  ErrorCurveOptions opts;
  opts.reference_factor = 1;
  const auto c = error_curve(kEarth1000, EvalPoint::from_ratio(1.0, kEarth1000), 500, opts);
  EXPECT_EQ(c.reference_terms, 500u);
  ASSERT_FALSE(c.samples.empty());
  EXPECT_EQ(c.samples.back().l, 500u);
  EXPECT_EQ(c.samples.back().error, 0.0);
  EXPECT_THROW(error_curve(kEarth1000, EvalPoint::from_ratio(1.0, kEarth1000), 1), InvalidInput);
}

TEST(ErrorCurveTest, LogSpacedAndDecaying) {
  const auto c = error_curve(kEarth1000, EvalPoint::from_ratio(1.0, kEarth1000), 20000);
  for (std::size_t i = 1; i < c.samples.size(); ++i) {
    EXPECT_GT(c.samples[i].l, c.samples[i - 1].l);
    EXPECT_GE(c.samples[i].envelope, c.samples[i].error);
  }
  EXPECT_NEAR(c.reference, -6.7542925347032642e-2, 1e-15);
  const double slope = fit_loglog_slope(c, 2000, 20000);
  EXPECT_GE(slope, -4.0);
  EXPECT_LE(slope, -3.0);
}
