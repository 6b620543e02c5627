#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sphgreen/errors.hpp"
#include "sphgreen/geometry.hpp"
#include "sphgreen/series.hpp"

namespace sphgreen {

/// Gauss-Legendre in colatitude times uniform in longitude. Nodes are stored
/// theta-major: node (i, j) has index i * n_phi + j. Weights carry R^2, so
/// they sum to the shell area 4 pi R^2.
class SphereGrid {
public:
  SphereGrid(std::size_t n_theta, std::size_t n_phi, double radius_km)
      : n_theta_(n_theta), n_phi_(n_phi), radius_km_(radius_km) {
    if (n_theta < 1 || n_phi < 1) throw InvalidInput("grid needs at least one node per axis");
    if (!(radius_km > 0)) throw InvalidParams("grid radius must be positive");
    gauss_legendre(n_theta, cos_theta_, gauss_weight_);
    theta_.resize(n_theta);
    sin_theta_.resize(n_theta);
    for (std::size_t i = 0; i < n_theta; ++i) {
      theta_[i] = std::acos(cos_theta_[i]);
      sin_theta_[i] = std::sqrt((1 - cos_theta_[i]) * (1 + cos_theta_[i]));
    }
    phi_.resize(n_phi);
    for (std::size_t j = 0; j < n_phi; ++j) phi_[j] = 2 * std::numbers::pi * j / n_phi;
  }

  /// The smallest grid on which analyze is exact up to degree l_max.
  static SphereGrid for_degree(std::size_t l_max, double radius_km) {
    return SphereGrid(l_max + 1, 2 * l_max + 2, radius_km);
  }

  std::size_t n_theta() const noexcept { return n_theta_; }
  std::size_t n_phi() const noexcept { return n_phi_; }
  std::size_t size() const noexcept { return n_theta_ * n_phi_; }
  double radius_km() const noexcept { return radius_km_; }

  double theta(std::size_t i) const { return theta_[i]; }
  double cos_theta(std::size_t i) const { return cos_theta_[i]; }
  double sin_theta(std::size_t i) const { return sin_theta_[i]; }
  double phi(std::size_t j) const { return phi_[j]; }
  SphericalPoint node(std::size_t index) const {
    return {theta_[index / n_phi_], phi_[index % n_phi_]};
  }

  /// Angular weight of ring i (Gauss weight times the longitude spacing).
  double ring_weight(std::size_t i) const {
    return gauss_weight_[i] * 2 * std::numbers::pi / static_cast<double>(n_phi_);
  }
  /// Area weight of any node on ring i, in km^2.
  double weight(std::size_t i) const { return ring_weight(i) * radius_km_ * radius_km_; }

  bool resolves(std::size_t l_max) const noexcept {
    return n_theta_ >= l_max + 1 && n_phi_ >= 2 * l_max + 1;
  }

private:
  // Nodes in decreasing cos(theta) (increasing theta) by Newton on P_n.
  static void gauss_legendre(std::size_t n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    const double nd = static_cast<double>(n);
    for (std::size_t k = 0; k < (n + 1) / 2; ++k) {
      double z = std::cos(std::numbers::pi * (k + 0.75) / (nd + 0.5));
      double dp = 0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = z;
        for (std::size_t l = 2; l <= n; ++l) {
          const double p2 = ((2.0 * l - 1) * z * p1 - (l - 1.0) * p0) / static_cast<double>(l);
          p0 = p1;
          p1 = p2;
        }
        dp = nd * (z * p1 - p0) / (z * z - 1);
        const double dz = p1 / dp;
        z -= dz;
        if (std::abs(dz) < 1e-16) break;
      }
      // recompute the derivative at the converged node
      double p0 = 1.0, p1 = z;
      for (std::size_t l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1) * z * p1 - (l - 1.0) * p0) / static_cast<double>(l);
        p0 = p1;
        p1 = p2;
      }
      dp = nd * (z * p1 - p0) / (z * z - 1);
      x[k] = z;
      x[n - 1 - k] = -z;
      w[k] = w[n - 1 - k] = 2.0 / ((1 - z * z) * dp * dp);
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
  }

  std::size_t n_theta_, n_phi_;
  double radius_km_;
  std::vector<double> theta_, cos_theta_, sin_theta_, gauss_weight_, phi_;
};

/// One real sample per grid node, theta-major.
struct SphereField {
  std::shared_ptr<const SphereGrid> grid;
  std::vector<double> samples;

  SphereField(std::shared_ptr<const SphereGrid> g, std::vector<double> s)
      : grid(std::move(g)), samples(std::move(s)) {
    if (!grid) throw InvalidInput("field without grid");
    if (samples.size() != grid->size()) {
      throw InvalidInput("field has " + std::to_string(samples.size()) + " samples, grid has " +
                         std::to_string(grid->size()) + " nodes");
    }
    for (double v : samples) {
      if (!std::isfinite(v)) throw InvalidInput("field contains a non-finite sample");
    }
  }

  static SphereField sample(std::shared_ptr<const SphereGrid> g,
                            const std::function<double(const SphericalPoint&)>& f) {
    std::vector<double> s(g->size());
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = f(g->node(k));
    return SphereField(std::move(g), std::move(s));
  }
};

/// Real spherical-harmonic coefficients f_lm, 0 <= l <= l_max, -l <= m <= l,
/// stored at index l^2 + l + m.
struct HarmonicCoeffs {
  std::size_t l_max = 0;
  std::vector<double> coeffs;

  explicit HarmonicCoeffs(std::size_t lmax) : l_max(lmax), coeffs((lmax + 1) * (lmax + 1), 0.0) {}

  static std::size_t index(std::size_t l, long m) {
    return static_cast<std::size_t>(static_cast<long>(l * l + l) + m);
  }
  double& at(std::size_t l, long m) { return coeffs[index(l, m)]; }
  double at(std::size_t l, long m) const { return coeffs[index(l, m)]; }
};

/// Orthonormal associated Legendre values pbar_lm(cos theta) for 0 <= m <= l <= l_max,
/// including the 1/sqrt(4 pi) factor and no Condon-Shortley phase. Index l(l+1)/2 + m.
inline std::vector<double> normalized_legendre(std::size_t l_max, double cos_t, double sin_t) {
  std::vector<double> p((l_max + 1) * (l_max + 2) / 2, 0.0);
  auto idx = [](std::size_t l, std::size_t m) { return l * (l + 1) / 2 + m; };
  double pmm = 0.5 / std::sqrt(std::numbers::pi);
  for (std::size_t m = 0; m <= l_max; ++m) {
    if (m > 0) pmm *= std::sqrt((2.0 * m + 1) / (2.0 * m)) * sin_t;
    p[idx(m, m)] = pmm;
    if (m + 1 > l_max) break;
    p[idx(m + 1, m)] = std::sqrt(2.0 * m + 3) * cos_t * pmm;
    for (std::size_t l = m + 2; l <= l_max; ++l) {
      const double ld = static_cast<double>(l), md = static_cast<double>(m);
      const double a = std::sqrt((4 * ld * ld - 1) / (ld * ld - md * md));
      const double b = std::sqrt(((ld - 1) * (ld - 1) - md * md) / (4 * (ld - 1) * (ld - 1) - 1));
      p[idx(l, m)] = a * (cos_t * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
    }
  }
  return p;
}

/// Real orthonormal Y_lm: sqrt2 pbar cos(m phi) for m > 0, sqrt2 pbar sin(|m| phi) for m < 0.
inline double real_sph_harm(std::size_t l, long m, const SphericalPoint& x) {
  const auto p = normalized_legendre(l, std::cos(x.theta), std::sin(x.theta));
  const std::size_t am = static_cast<std::size_t>(m < 0 ? -m : m);
  const double base = p[l * (l + 1) / 2 + am];
  if (m == 0) return base;
  const double s2 = std::numbers::sqrt2;
  return m > 0 ? s2 * base * std::cos(m * x.phi) : s2 * base * std::sin(-m * x.phi);
}

/// f_lm = (1/R^2) int Y_lm f dS by the grid quadrature. Exact for fields of
/// degree <= l_max when the grid resolves l_max.
inline HarmonicCoeffs analyze(const SphereField& field, std::size_t l_max) {
  const SphereGrid& g = *field.grid;
  if (!g.resolves(l_max)) {
    throw UnderResolved("grid " + std::to_string(g.n_theta()) + "x" + std::to_string(g.n_phi()) +
                        " cannot resolve degree " + std::to_string(l_max));
  }
  HarmonicCoeffs out(l_max);
  const double s2 = std::numbers::sqrt2;
  std::vector<double> ca(l_max + 1), sa(l_max + 1);
  for (std::size_t i = 0; i < g.n_theta(); ++i) {
    std::fill(ca.begin(), ca.end(), 0.0);
    std::fill(sa.begin(), sa.end(), 0.0);
    const double* row = field.samples.data() + i * g.n_phi();
    for (std::size_t j = 0; j < g.n_phi(); ++j) {
      for (std::size_t m = 0; m <= l_max; ++m) {
        ca[m] += row[j] * std::cos(m * g.phi(j));
        sa[m] += row[j] * std::sin(m * g.phi(j));
      }
    }
    const auto p = normalized_legendre(l_max, g.cos_theta(i), g.sin_theta(i));
    const double wt = g.ring_weight(i);
    for (std::size_t l = 0; l <= l_max; ++l) {
      out.at(l, 0) += wt * p[l * (l + 1) / 2] * ca[0];
      for (std::size_t m = 1; m <= l; ++m) {
        const double pw = wt * s2 * p[l * (l + 1) / 2 + m];
        out.at(l, static_cast<long>(m)) += pw * ca[m];
        out.at(l, -static_cast<long>(m)) += pw * sa[m];
      }
    }
  }
  return out;
}

/// Pointwise sum_lm f_lm Y_lm on the grid nodes.
inline SphereField synthesize(const HarmonicCoeffs& coeffs, std::shared_ptr<const SphereGrid> grid) {
  const SphereGrid& g = *grid;
  const std::size_t L = coeffs.l_max;
  const double s2 = std::numbers::sqrt2;
  std::vector<double> out(g.size(), 0.0);
  std::vector<double> a(L + 1), b(L + 1);
  for (std::size_t i = 0; i < g.n_theta(); ++i) {
    const auto p = normalized_legendre(L, g.cos_theta(i), g.sin_theta(i));
    std::fill(a.begin(), a.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    for (std::size_t l = 0; l <= L; ++l) {
      a[0] += coeffs.at(l, 0) * p[l * (l + 1) / 2];
      for (std::size_t m = 1; m <= l; ++m) {
        const double pv = s2 * p[l * (l + 1) / 2 + m];
        a[m] += coeffs.at(l, static_cast<long>(m)) * pv;
        b[m] += coeffs.at(l, -static_cast<long>(m)) * pv;
      }
    }
    for (std::size_t j = 0; j < g.n_phi(); ++j) {
      double v = a[0];
      for (std::size_t m = 1; m <= L; ++m) {
        v += a[m] * std::cos(m * g.phi(j)) + b[m] * std::sin(m * g.phi(j));
      }
      out[i * g.n_phi() + j] = v;
    }
  }
  return SphereField(std::move(grid), std::move(out));
}

/// Eigenvalue of the screened operator on degree l: -l(l+1)/R^2 - 1/L_d^2 (never zero).
inline double screened_eigenvalue(std::size_t l, const ShellParams& params) {
  const double R = params.radius_km(), L = params.rossby_km();
  const double ld = static_cast<double>(l);
  return -ld * (ld + 1) / (R * R) - 1.0 / (L * L);
}

/// psi with u_lm = f_lm / (-l(l+1)/R^2 - 1/L_d^2), synthesized on f's grid.
inline SphereField solve_spectral(const SphereField& f, const ShellParams& params, std::size_t l_max) {
  HarmonicCoeffs c = analyze(f, l_max);
  for (std::size_t l = 0; l <= l_max; ++l) {
    const double inv = 1.0 / screened_eigenvalue(l, params);
    for (long m = -static_cast<long>(l); m <= static_cast<long>(l); ++m) c.at(l, m) *= inv;
  }
  return synthesize(c, f.grid);
}

/// Kernel G(gamma) used by the convolution solver.
using GreenKernel = std::function<double(const EvalPoint&)>;

/// How the singular j = i term of the convolution sum is treated.
enum class SelfTerm {
  /// psi_i = sum_j G_ij (f_j - f_i) w_j + f_i * int G dA. The bracket vanishes at
  /// j = i and the kernel integral is exact (-L_d^2 for G).
  subtract,
  /// psi_i = sum_{j != i} G_ij f_j w_j + f_i w_i * self_cell_average(...).
  disk_average,
};

struct ConvolutionOptions {
  /// Defaults to the split sum at epsilon when empty.
  GreenKernel kernel;
  double epsilon = kDefaultEpsilonDouble;
  SelfTerm self_term = SelfTerm::subtract;
  /// int kernel dA in km^2; required with a custom kernel and SelfTerm::subtract.
  std::optional<double> kernel_integral_km2;
};

/// Disk average of G over a node's own cell: G* averaged over a geodesic disk of
/// the cell's area (small-disk limit, (1/2pi) log(a/2) for angular radius a)
/// plus the finite limit of G - G* at zero separation.
inline double self_cell_average(double cell_area_km2, double radius_km, double regular_at_zero) {
  const double a = std::sqrt(cell_area_km2 / std::numbers::pi) / radius_km;
  return 0.5 * std::numbers::inv_pi * std::log(0.5 * a) + regular_at_zero;
}

/// psi(x_i) = sum_j G(gamma(x_i, x_j)) f(x_j) w_j over the grid nodes.
///
/// On the product grid the kernel depends on (ring i, ring k, longitude offset),
/// so it is tabulated once per ring pair using the symmetries in (i, k) and in the
/// sign of the offset. Each output row is summed in a fixed order.
inline SphereField solve_convolution(const SphereField& f, const ShellParams& params,
                                     const ConvolutionOptions& opts = {}) {
  const SphereGrid& g = *f.grid;
  const std::size_t nt = g.n_theta(), np = g.n_phi();
  if (opts.kernel && opts.self_term == SelfTerm::subtract && !opts.kernel_integral_km2) {
    throw InvalidInput("a custom convolution kernel needs kernel_integral_km2 for self-term subtraction");
  }
  std::optional<SplitKernel> split;
  if (!opts.kernel) split.emplace(params, TruncationPolicy::automatic(opts.epsilon));

  // Off-diagonal sites, one per (i <= k, 0 <= d <= np/2) except the node itself.
  struct Site {
    std::size_t i, k, d;
  };
  std::vector<Site> sites;
  std::vector<EvalPoint> points;
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t k = i; k < nt; ++k) {
      for (std::size_t d = 0; d <= np / 2; ++d) {
        if (i == k && d == 0) continue;
        sites.push_back({i, k, d});
        points.push_back(central_angle({g.theta(i), 0.0}, {g.theta(k), g.phi(d)}));
      }
    }
  }
  std::vector<double> values(points.size());
  if (split) {
    std::vector<double> x(points.size());
    for (std::size_t s = 0; s < points.size(); ++s) x[s] = points[s].cos_gamma();
    split->regular_part_batch(x, values);
    for (std::size_t s = 0; s < points.size(); ++s) values[s] += g_star(points[s]);
  } else {
    for (std::size_t s = 0; s < points.size(); ++s) values[s] = opts.kernel(points[s]);
  }

  // table[(i * nt + k) * np + d] = G between ring i, ring k at longitude offset d.
  std::vector<double> table(nt * nt * np, 0.0);
  for (std::size_t s = 0; s < sites.size(); ++s) {
    const auto [i, k, d] = sites[s];
    const std::size_t dm = (np - d) % np;
    for (std::size_t e : {d, dm}) {
      table[(i * nt + k) * np + e] = values[s];
      table[(k * nt + i) * np + e] = values[s];
    }
  }

  const bool subtract = opts.self_term == SelfTerm::subtract;
  const double integral = opts.kernel_integral_km2.value_or(1.0 / screened_eigenvalue(0, params));
  const double regular0 = split ? split->regular_part_at_zero() : 0.0;

  std::vector<double> psi(g.size(), 0.0);
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < np; ++j) {
      const double fi = f.samples[i * np + j];
      double acc = 0;
      for (std::size_t k = 0; k < nt; ++k) {
        const double* row = table.data() + (i * nt + k) * np;
        const double* src = f.samples.data() + k * np;
        double ring = 0;
        for (std::size_t jj = 0; jj < np; ++jj) {
          ring += row[(jj + np - j) % np] * (subtract ? src[jj] - fi : src[jj]);
        }
        acc += ring * g.weight(k);
      }
      if (subtract) {
        acc += fi * integral;
      } else {
        acc += fi * g.weight(i) * self_cell_average(g.weight(i), g.radius_km(), regular0);
      }
      psi[i * np + j] = acc;
    }
  }
  return SphereField(f.grid, std::move(psi));
}

/// Grid inner product <a, b> = sum_k w_k a_k b_k.
inline double inner_product(const SphereField& a, const SphereField& b) {
  const SphereGrid& g = *a.grid;
  double s = 0;
  for (std::size_t i = 0; i < g.n_theta(); ++i) {
    double ring = 0;
    for (std::size_t j = 0; j < g.n_phi(); ++j) {
      ring += a.samples[i * g.n_phi() + j] * b.samples[i * g.n_phi() + j];
    }
    s += g.weight(i) * ring;
  }
  return s;
}

/// ||a - b|| / ||b|| in the grid L2 norm.
inline double relative_l2(const SphereField& a, const SphereField& b) {
  std::vector<double> d(a.samples.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = a.samples[k] - b.samples[k];
  const SphereField diff(a.grid, std::move(d));
  return std::sqrt(inner_product(diff, diff) / inner_product(b, b));
}

}  // namespace sphgreen
