#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "sphgreen/field_io.hpp"
#include "sphgreen/legendre.hpp"
#include "sphgreen/spectral.hpp"

using namespace sphgreen;
constexpr double pi = std::numbers::pi;

namespace {

const ShellParams kEarth1000 = make_params(6371.0, 1000.0);

std::shared_ptr<const SphereGrid> grid_for(std::size_t l_max, double radius = 6371.0) {
  return std::make_shared<const SphereGrid>(SphereGrid::for_degree(l_max, radius));
}

HarmonicCoeffs random_coeffs(std::size_t l_max, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0, 1);
  HarmonicCoeffs c(l_max);
  for (double& v : c.coeffs) v = n(rng);
  return c;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

}  // namespace

TEST(Grid, WeightsSumToArea) {
  for (std::size_t l : {1u, 4u, 16u, 32u, 64u}) {
    const auto g = SphereGrid::for_degree(l, 6371.0);
    double s = 0;
    for (std::size_t i = 0; i < g.n_theta(); ++i) s += g.weight(i) * g.n_phi();
    EXPECT_NEAR(s / (4 * pi * 6371.0 * 6371.0), 1.0, 1e-12) << l;
    EXPECT_TRUE(g.resolves(l));
    EXPECT_FALSE(g.resolves(l + 1));
    EXPECT_GE(g.n_phi(), 2 * l + 1);
  }
}

TEST(Grid, NodesAreThetaMajor) {
  const auto g = SphereGrid::for_degree(3, 1.0);
  EXPECT_EQ(g.size(), 4u * 8u);
  EXPECT_EQ(g.node(9).theta, g.theta(1));
  EXPECT_EQ(g.node(9).phi, g.phi(1));
  for (std::size_t i = 1; i < g.n_theta(); ++i) EXPECT_GT(g.theta(i), g.theta(i - 1));
  EXPECT_THROW(SphereGrid(0, 4, 1.0), InvalidInput);
}

TEST(Field, Validation) {
  const auto g = grid_for(2);
  EXPECT_THROW(SphereField(g, std::vector<double>(3, 0.0)), InvalidInput);
  std::vector<double> bad(g->size(), 0.0);
  bad[2] = NAN;
  EXPECT_THROW(SphereField(g, bad), InvalidInput);
}

TEST(Harmonics, MatchKnownLowDegree) {
  const SphericalPoint x{0.8, 1.9};
  const double c = std::cos(x.theta), s = std::sin(x.theta);
  EXPECT_NEAR(real_sph_harm(0, 0, x), 0.5 / std::sqrt(pi), 1e-15);
  EXPECT_NEAR(real_sph_harm(1, 0, x), std::sqrt(3 / (4 * pi)) * c, 1e-15);
  EXPECT_NEAR(real_sph_harm(1, 1, x), std::sqrt(3 / (4 * pi)) * s * std::cos(x.phi), 1e-15);
  EXPECT_NEAR(real_sph_harm(1, -1, x), std::sqrt(3 / (4 * pi)) * s * std::sin(x.phi), 1e-15);
  EXPECT_NEAR(real_sph_harm(2, 0, x), std::sqrt(5 / (16 * pi)) * (3 * c * c - 1), 1e-15);
  EXPECT_NEAR(real_sph_harm(2, 2, x), std::sqrt(15 / (16 * pi)) * s * s * std::cos(2 * x.phi), 1e-15);
}

TEST(Harmonics, AdditionTheorem) {
  const auto g = grid_for(8);
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<std::size_t> node(0, g->size() - 1);
  for (int n = 0; n < 50; ++n) {
    const auto a = g->node(node(rng)), b = g->node(node(rng));
    const double cg = std::cos(angular_separation(a, b));
    const auto p = legendre_all(std::clamp(cg, -1.0, 1.0), 8);
    for (std::size_t l = 0; l <= 8; ++l) {
      double s = 0;
      for (long m = -static_cast<long>(l); m <= static_cast<long>(l); ++m) {
        s += real_sph_harm(l, m, a) * real_sph_harm(l, m, b);
      }
      EXPECT_NEAR(4 * pi / (2 * l + 1) * s, p.values[l], 1e-12) << l;
    }
  }
}

TEST(Analyze, SingleHarmonic) {
  const auto g = grid_for(4);
  const auto f = SphereField::sample(g, [](const SphericalPoint& x) { return real_sph_harm(2, 1, x); });
  const auto c = analyze(f, 4);
  for (std::size_t l = 0; l <= 4; ++l) {
    for (long m = -static_cast<long>(l); m <= static_cast<long>(l); ++m) {
      EXPECT_NEAR(c.at(l, m), (l == 2 && m == 1) ? 1.0 : 0.0, 1e-12) << l << " " << m;
    }
  }
}

TEST(Analyze, Constant) {
  const auto g = grid_for(6);
  const auto f = SphereField::sample(g, [](const SphericalPoint&) { return 2.5; });
  const auto c = analyze(f, 6);
  EXPECT_NEAR(c.at(0, 0), 2.5 * std::sqrt(4 * pi), 1e-12);
  for (std::size_t k = 1; k < c.coeffs.size(); ++k) EXPECT_NEAR(c.coeffs[k], 0.0, 1e-12);
}

TEST(Analyze, Linearity) {
  const auto g = grid_for(5);
  const auto f = SphereField::sample(g, [](const SphericalPoint& x) {
    return real_sph_harm(3, -2, x) + 0.5 * real_sph_harm(1, 0, x);
  });
  const auto c = analyze(f, 5);
  EXPECT_NEAR(c.at(1, 0), 0.5, 1e-12);
  EXPECT_NEAR(c.at(3, -2), 1.0, 1e-12);
  EXPECT_NEAR(c.at(3, 2), 0.0, 1e-12);
}

TEST(Analyze, UnderResolvedGrid) {
  const auto g = grid_for(4);
  const auto f = SphereField::sample(g, [](const SphericalPoint&) { return 1.0; });
  EXPECT_THROW(analyze(f, 5), UnderResolved);
}

TEST(Synthesize, SingleMode) {
  const auto g = grid_for(6);
  HarmonicCoeffs c(6);
  c.at(5, 3) = 2.0;
  const auto f = synthesize(c, g);
  for (std::size_t k = 0; k < g->size(); ++k) {
    EXPECT_NEAR(f.samples[k], 2 * real_sph_harm(5, 3, g->node(k)), 1e-12);
  }
}

TEST(Synthesize, RoundTrip) {
  for (std::size_t l_max : {4u, 16u}) {
    const auto g = grid_for(l_max);
    const auto c = random_coeffs(l_max, 100 + l_max);
    const auto back = analyze(synthesize(c, g), l_max);
    EXPECT_LE(max_abs_diff(back.coeffs, c.coeffs), l_max == 4 ? 1e-12 : 1e-11);
  }
}

TEST(SolveSpectral, SingleHarmonic) {
  const auto g = grid_for(8);
  const auto f = SphereField::sample(g, [](const SphericalPoint& x) { return real_sph_harm(3, -1, x); });
  const auto psi = solve_spectral(f, kEarth1000, 8);
  const double lam = -12.0 / (6371.0 * 6371.0) - 1.0 / (1000.0 * 1000.0);
  for (std::size_t k = 0; k < g->size(); ++k) {
    EXPECT_NEAR(psi.samples[k], f.samples[k] / lam, 1e-10 * std::abs(1 / lam));
  }
}

TEST(SolveSpectral, ConstantForcing) {
  const auto g = grid_for(4);
  const auto f = SphereField::sample(g, [](const SphericalPoint&) { return 3.0; });
  const auto psi = solve_spectral(f, kEarth1000, 4);
  for (double v : psi.samples) EXPECT_NEAR(v, -3.0 * 1e6, 1e-6);
}

TEST(SolveSpectral, ResidualRecoversForcing) {
  const std::size_t L = 32;
  const auto g = grid_for(L);
  const auto f = synthesize(random_coeffs(L, 7), g);
  const auto psi = solve_spectral(f, kEarth1000, L);
  // Apply the screened operator spectrally: -l(l+1)/R^2 u_lm - u_lm/L_d^2.
  auto u = analyze(psi, L);
  for (std::size_t l = 0; l <= L; ++l) {
    for (long m = -static_cast<long>(l); m <= static_cast<long>(l); ++m) {
      u.at(l, m) *= screened_eigenvalue(l, kEarth1000);
    }
  }
  EXPECT_LE(relative_l2(synthesize(u, g), f), 1e-10);
}

TEST(SolveSpectral, SelfAdjoint) {
  const std::size_t L = 16;
  const auto g = grid_for(L);
  const auto f = synthesize(random_coeffs(L, 1), g);
  const auto h = synthesize(random_coeffs(L, 2), g);
  const double a = inner_product(solve_spectral(f, kEarth1000, L), h);
  const double b = inner_product(f, solve_spectral(h, kEarth1000, L));
  EXPECT_NEAR(a / b, 1.0, 1e-10);
}

TEST(SolveSpectral, NonNegativeForcingGivesNegativeMean) {
  const auto g = grid_for(16);
  const auto f = gaussian_bump(g, kEarth1000);
  const auto c = analyze(solve_spectral(f, kEarth1000, 16), 16);
  EXPECT_LT(c.at(0, 0), 0.0);
  EXPECT_GT(screened_eigenvalue(0, kEarth1000), -1.01e-6);
  for (std::size_t l = 0; l < 50; ++l) EXPECT_LT(screened_eigenvalue(l, kEarth1000), 0.0);
}

TEST(SolveConvolution, ZeroForcing) {
  const auto g = grid_for(8);
  const SphereField f(g, std::vector<double>(g->size(), 0.0));
  const auto psi = solve_convolution(f, kEarth1000);
  for (double v : psi.samples) EXPECT_EQ(v, 0.0);
}

TEST(SolveConvolution, ZonalHarmonicMatchesSpectral) {
  const std::size_t L = 32;
  const auto g = grid_for(L);
  const auto f = preset_field("y20", g, kEarth1000);
  const double d = relative_l2(solve_convolution(f, kEarth1000), solve_spectral(f, kEarth1000, L));
  EXPECT_LE(d, 1e-3);
}

TEST(SolveConvolution, GaussianBumpMatchesSpectralAndConverges) {
  const auto g32 = grid_for(32);
  const auto f32 = gaussian_bump(g32, kEarth1000);
  const double d32 = relative_l2(solve_convolution(f32, kEarth1000), solve_spectral(f32, kEarth1000, 32));
  EXPECT_LE(d32, 1e-2);

  const auto g64 = grid_for(64);
  const auto f64 = gaussian_bump(g64, kEarth1000);
  const double d64 = relative_l2(solve_convolution(f64, kEarth1000), solve_spectral(f64, kEarth1000, 64));
  EXPECT_GE(d32 / d64, 1.5) << d32 << " " << d64;
}

TEST(SolveConvolution, CustomKernelIsUsed) {
  const auto g = grid_for(4);
  const double area = 4 * pi * 6371.0 * 6371.0;
  const auto f = SphereField::sample(g, [](const SphericalPoint& x) { return 2.0 + std::cos(x.theta); });
  ConvolutionOptions opts;
  opts.kernel = [](const EvalPoint&) { return 1.0; };
  EXPECT_THROW(solve_convolution(f, kEarth1000, opts), InvalidInput);
  opts.kernel_integral_km2 = area;
  // With a constant kernel psi is the same everywhere: the integral of f.
  const auto psi = solve_convolution(f, kEarth1000, opts);
  const double total = inner_product(f, SphereField(g, std::vector<double>(g->size(), 1.0)));
  for (double v : psi.samples) EXPECT_NEAR(v / total, 1.0, 1e-13);
}

TEST(SolveConvolution, DiskAverageSelfTerm) {
  const auto g = grid_for(4);
  const auto f = SphereField::sample(g, [](const SphericalPoint&) { return 1.0; });
  ConvolutionOptions opts;
  opts.kernel = [](const EvalPoint&) { return 0.0; };
  opts.self_term = SelfTerm::disk_average;
  // Only the node's own cell contributes.
  const auto psi = solve_convolution(f, kEarth1000, opts);
  for (std::size_t k = 0; k < g->size(); ++k) {
    const std::size_t i = k / g->n_phi();
    EXPECT_DOUBLE_EQ(psi.samples[k], g->weight(i) * self_cell_average(g->weight(i), 6371.0, 0.0));
  }

  // The default kernel with the disk rule converges, though more slowly than subtraction.
  const auto g16 = grid_for(16);
  const auto y = preset_field("y20", g16, kEarth1000);
  ConvolutionOptions disk;
  disk.self_term = SelfTerm::disk_average;
  const auto spectral = solve_spectral(y, kEarth1000, 16);
  const double d_disk = relative_l2(solve_convolution(y, kEarth1000, disk), spectral);
  const double d_sub = relative_l2(solve_convolution(y, kEarth1000), spectral);
  EXPECT_LE(d_disk, 0.1);
  EXPECT_LT(d_sub, d_disk);
}

TEST(SolveConvolution, ConstantForcingIsExact) {
  const auto g = grid_for(16);
  const auto f = SphereField::sample(g, [](const SphericalPoint&) { return 3.0; });
  for (double v : solve_convolution(f, kEarth1000).samples) EXPECT_NEAR(v, -3e6, 1e-6);
}
