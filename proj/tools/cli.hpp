#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sphgreen/sphgreen.hpp"

namespace sphgreen::cli {

enum class ExitCode : int { ok = 0, config = 2, numerical = 3 };

using Cell = std::variant<std::monostate, double, std::uint64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

inline void write_csv(const Table& t, std::ostream& os) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) os << ',';
      std::visit(
          [&os](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, double>) os << format_double(v);
            else if constexpr (std::is_same_v<V, std::uint64_t> || std::is_same_v<V, std::string>) os << v;
          },
          row[c]);
    }
    os << '\n';
  }
}

inline void write_json(const Table& t, std::ostream& os) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::visit(
          [&](const auto& v) {
            using V = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<V, std::monostate>) obj[t.columns[c]] = nullptr;
            else obj[t.columns[c]] = v;
          },
          row[c]);
    }
    arr.push_back(std::move(obj));
  }
  os << arr.dump(2) << '\n';
}

/// Options shared by the commands; each subcommand binds the subset it uses.
struct RunConfig {
  std::vector<double> ld_km;
  double radius_km = kDefaultRadiusKm;
  std::vector<double> gamma_ratio;
  std::vector<double> cos_gamma;
  std::string method = "auto";
  std::string precision;
  std::optional<double> epsilon;
  std::optional<std::uint64_t> l_trunc;
  std::optional<std::uint64_t> l_max;
  double rel_tol = 1e-13;
  std::size_t max_subdiv = QuadratureSpec{}.max_subdiv;
  std::string preset;
  std::string format = "csv";
  std::string output;
  std::string input;
  std::string ratio_rounding = "none";
  std::string self_term = "subtract";
};

namespace detail {

inline double apply_rounding(double ratio, const RunConfig& cfg) {
  return cfg.ratio_rounding == "binary32" ? static_cast<double>(static_cast<float>(ratio)) : ratio;
}

inline Precision parse_precision(const std::string& s) {
  return s == "dd" ? Precision::double_double : Precision::binary64;
}

// One evaluation site: a Rossby radius and an angle given either as a ratio or as cos(gamma).
struct Site {
  double ld_km;
  std::optional<double> ratio;
  std::optional<double> cos_gamma;
};

inline EvalPoint site_point(const Site& s, const ShellParams& params) {
  return s.ratio ? EvalPoint::from_ratio(*s.ratio, params) : EvalPoint::from_cos(*s.cos_gamma);
}

inline std::optional<double> closed_form(const ShellParams& params, const EvalPoint& p) {
  if (p.cos_gamma() == -1.0) return green_antipode(params);
  if (p.cos_gamma() == 0.0) return green_equator(params);
  return std::nullopt;
}

inline TruncationPolicy split_policy(const RunConfig& cfg, Precision prec) {
  if (cfg.l_trunc) return TruncationPolicy::fixed(*cfg.l_trunc);
  const double def = prec == Precision::double_double ? kDefaultEpsilonDD : kDefaultEpsilonDouble;
  return TruncationPolicy::automatic(cfg.epsilon.value_or(def));
}

inline std::vector<Site> sites_from(const RunConfig& cfg) {
  if (cfg.ld_km.empty()) throw InvalidInput("at least one --ld-km value is required");
  if (cfg.gamma_ratio.empty() == cfg.cos_gamma.empty()) {
    throw InvalidInput("give a non-empty --gamma-ratio list or a non-empty --cos-gamma list (not both)");
  }
  std::vector<Site> out;
  for (double ld : cfg.ld_km) {
    for (double r : cfg.gamma_ratio) out.push_back({ld, apply_rounding(r, cfg), std::nullopt});
    for (double c : cfg.cos_gamma) out.push_back({ld, std::nullopt, c});
  }
  return out;
}

inline std::vector<double> table1_ratios() {
  return {0.001, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09,
          0.1,   0.15,  0.2,  0.25, 0.3,  0.4,  0.5,  0.6,  0.7,  0.8,  0.9,
          1,     2,     3,    4,    5,    6,    7,    8,    9,    10};
}

inline std::vector<double> figure_ratios() {
  std::vector<double> r;
  for (int k = 1; k <= 200; ++k) r.push_back(k / 10.0);
  return r;
}

inline std::vector<double> ld_range(int lo, int hi, int step) {
  std::vector<double> v;
  for (int l = lo; l <= hi; l += step) v.push_back(l);
  return v;
}

inline void require_split_precision(const RunConfig& cfg, const std::string& method) {
  if (cfg.precision == "dd" && method != "split" && method != "auto") {
    throw InvalidInput("--precision dd is only available with --method split");
  }
}

}  // namespace detail

inline Table cmd_eval(const RunConfig& cfg) {
  if (cfg.ld_km.size() != 1) throw InvalidInput("eval takes exactly one --ld-km");
  if (cfg.gamma_ratio.size() + cfg.cos_gamma.size() != 1) {
    throw InvalidInput("eval takes exactly one of --gamma-ratio or --cos-gamma");
  }
  detail::require_split_precision(cfg, cfg.method);
  const auto site = detail::sites_from(cfg).front();
  const auto params = make_params(cfg.radius_km, site.ld_km);
  const auto p = detail::site_point(site, params);
  const Precision prec = detail::parse_precision(cfg.precision);

  std::string method = cfg.method;
  if (method == "auto") {
    method = (prec == Precision::binary64 && detail::closed_form(params, p)) ? "closed" : "split";
  }
  GreenResult r;
  if (method == "split") {
    r = green_split(params, p, detail::split_policy(cfg, prec), prec);
  } else if (method == "direct") {
    if (!cfg.l_trunc) throw InvalidInput("--method direct needs --l-trunc");
    r = green_direct(params, p, *cfg.l_trunc);
  } else if (method == "quadrature") {
    QuadratureSpec spec;
    spec.rel_tol = cfg.rel_tol;
    spec.max_subdiv = cfg.max_subdiv;
    r = green_quadrature(params, p, spec);
  } else {
    const auto v = detail::closed_form(params, p);
    if (!v) throw InvalidInput("closed forms exist only for cos(gamma) = 0 and cos(gamma) = -1");
    r = {*v, Method::closed_form, 1, 4 * std::numeric_limits<double>::epsilon() * std::abs(*v)};
  }

  Table t;
  t.columns = {"ld_km", "radius_km", "gamma_ratio", "gamma_rad", "cos_gamma",
               "value", "method", "terms_used", "est_error"};
  t.rows.push_back({site.ld_km, cfg.radius_km, p.gamma() / params.gamma_star(), p.gamma(), p.cos_gamma(),
                    r.value, std::string(to_string(r.method)), r.terms_used, r.est_error});
  return t;
}

inline Table cmd_table(const RunConfig& cfg) {
  RunConfig c = cfg;
  std::vector<detail::Site> sites;
  if (cfg.preset == "table1") {
    for (double r : detail::table1_ratios()) sites.push_back({1000.0, detail::apply_rounding(r, cfg), std::nullopt});
  } else if (cfg.preset == "table2") {
    for (double ld : detail::ld_range(300, 2000, 100)) sites.push_back({ld, std::nullopt, 0.0});
    for (double ld : detail::ld_range(600, 2000, 100)) sites.push_back({ld, std::nullopt, -1.0});
  } else if (cfg.preset.empty()) {
    sites = detail::sites_from(cfg);
  } else {
    throw InvalidInput("table presets are table1 and table2");
  }
  if (c.precision.empty()) c.precision = "dd";
  const Precision prec = detail::parse_precision(c.precision);
  QuadratureSpec spec;
  spec.rel_tol = cfg.rel_tol;
  spec.max_subdiv = cfg.max_subdiv;

  Table t;
  t.columns = {"ld_km", "gamma_ratio", "gamma_rad", "cos_gamma", "g_split", "g_quadrature", "g_closed",
               "rel_diff", "split_method", "split_terms", "split_est_error", "quadrature_est_error"};
  for (const auto& s : sites) {
    const auto params = make_params(cfg.radius_km, s.ld_km);
    const auto p = detail::site_point(s, params);
    const auto split = green_split(params, p, detail::split_policy(c, prec), prec);
    const auto quad = green_quadrature(params, p, spec);
    const auto closed = detail::closed_form(params, p);
    const double ref = closed ? *closed : quad.value;
    t.rows.push_back({s.ld_km, p.gamma() / params.gamma_star(), p.gamma(), p.cos_gamma(), split.value, quad.value,
                      closed ? Cell(*closed) : Cell(), (split.value - ref) / ref,
                      std::string(to_string(split.method)), split.terms_used, split.est_error, quad.est_error});
  }
  return t;
}

inline Table cmd_error_curve(const RunConfig& cfg, std::ostream& log) {
  RunConfig c = cfg;
  if (cfg.preset == "fig2") {
    c.ld_km = {1000.0, 100.0};
    c.gamma_ratio = {1.0};
    c.cos_gamma.clear();
  } else if (!cfg.preset.empty()) {
    throw InvalidInput("the error-curve preset is fig2");
  }
  const std::uint64_t l_max = c.l_max.value_or(100000);
  if (l_max < 2) throw InvalidInput("--l-max must be at least 2");
  ErrorCurveOptions opts;
  if (c.epsilon) opts.reference_epsilon = *c.epsilon;

  Table t;
  t.columns = {"ld_km", "gamma_ratio", "l", "error", "envelope", "method", "est_error"};
  for (const auto& s : detail::sites_from(c)) {
    const auto params = make_params(c.radius_km, s.ld_km);
    const auto p = detail::site_point(s, params);
    const auto curve = error_curve(params, p, l_max, opts);
    for (const auto& e : curve.samples) {
      t.rows.push_back({s.ld_km, p.gamma() / params.gamma_star(), e.l, e.error, e.envelope, std::string("split_dd"),
                        kInv4Pi * std::abs(bracket_coefficient(e.l, params.w()))});
    }
    const auto lo = std::max<std::uint64_t>(2, l_max / 10);
    char buf[160];
    std::snprintf(buf, sizeof buf, "# ld_km=%g gamma_ratio=%g slope[%llu,%llu]=%.4f reference_terms=%llu\n",
                  s.ld_km, p.gamma() / params.gamma_star(), static_cast<unsigned long long>(lo),
                  static_cast<unsigned long long>(l_max), fit_loglog_slope(curve, lo, l_max),
                  static_cast<unsigned long long>(curve.reference_terms));
    log << buf;
  }
  return t;
}

inline Table cmd_gg_star(const RunConfig& cfg, std::ostream& log) {
  RunConfig c = cfg;
  if (cfg.preset == "fig3" || cfg.preset == "fig4") {
    c.ld_km = cfg.preset == "fig3" ? detail::ld_range(100, 1000, 100) : std::vector<double>{50.0, 100.0, 1000.0};
    if (cfg.preset == "fig3") c.ld_km.insert(c.ld_km.begin(), 50.0);
    c.gamma_ratio = detail::figure_ratios();
    c.cos_gamma.clear();
  } else if (!cfg.preset.empty()) {
    throw InvalidInput("gg-star presets are fig3 and fig4");
  }
  if (c.precision.empty()) c.precision = "double";
  const Precision prec = detail::parse_precision(c.precision);
  const auto sites = detail::sites_from(c);

  Table t;
  t.columns = {"ld_km", "gamma_ratio", "gamma_rad", "g", "g_star", "g_minus_g_star", "method", "terms_used",
               "est_error"};
  std::unique_ptr<SplitKernel> kernel;
  double kernel_ld = -1;
  for (const auto& s : sites) {
    const auto params = make_params(c.radius_km, s.ld_km);
    std::optional<EvalPoint> p;
    try {
      p = detail::site_point(s, params);
    } catch (const InvalidInput& e) {
      log << "warning: skipping ld_km=" << s.ld_km << " point: " << e.what() << '\n';
      continue;
    }
    const double gs = g_star(*p);
    GreenResult r;
    double regular;
    if (prec == Precision::double_double) {
      r = green_split(params, *p, detail::split_policy(c, prec), prec);
      const auto l = resolve_truncation(detail::split_policy(c, prec), params);
      regular = dd_to_double(green_split_dd_value(params, *p, l) - g_star_dd(*p));
    } else {
      if (!kernel || kernel_ld != s.ld_km) {
        kernel = std::make_unique<SplitKernel>(params, detail::split_policy(c, prec));
        kernel_ld = s.ld_km;
      }
      r = (*kernel)(*p);
      regular = kernel->regular_part(*p);
    }
    t.rows.push_back({s.ld_km, p->gamma() / params.gamma_star(), p->gamma(), r.value, gs, regular,
                      std::string(to_string(r.method)), r.terms_used, r.est_error});
  }
  return t;
}

/// Returns the field written and, for method "both", the relative L2 discrepancy.
inline std::pair<SphereField, std::optional<double>> cmd_solve(const RunConfig& cfg) {
  std::optional<SphereField> f;
  if (!cfg.input.empty()) {
    std::ifstream in(cfg.input);
    if (!in) throw InvalidInput("cannot open input field '" + cfg.input + "'");
    f = read_field(in);
  }
  if (cfg.ld_km.size() != 1) throw InvalidInput("solve takes exactly one --ld-km");
  const auto params = make_params(f ? f->grid->radius_km() : cfg.radius_km, cfg.ld_km.front());
  if (!f) {
    if (cfg.preset.empty()) throw InvalidInput("solve needs --input or --preset");
    const auto grid = std::make_shared<const SphereGrid>(SphereGrid::for_degree(cfg.l_max.value_or(32), cfg.radius_km));
    f = preset_field(cfg.preset, grid, params);
  }
  const SphereGrid& g = *f->grid;
  const std::size_t resolvable = std::min(g.n_theta() - 1, (g.n_phi() - 1) / 2);
  const std::size_t l_max = cfg.l_max ? *cfg.l_max : resolvable;

  const std::string& m = cfg.method;
  if (m != "spectral" && m != "convolution" && m != "both") {
    throw InvalidInput("solve --method must be spectral, convolution or both");
  }
  ConvolutionOptions opts;
  if (cfg.epsilon) opts.epsilon = *cfg.epsilon;
  opts.self_term = cfg.self_term == "disk" ? SelfTerm::disk_average : SelfTerm::subtract;
  if (m == "convolution") return {solve_convolution(*f, params, opts), std::nullopt};
  auto spectral = solve_spectral(*f, params, l_max);
  if (m == "spectral") return {std::move(spectral), std::nullopt};
  const auto conv = solve_convolution(*f, params, opts);
  const double d = relative_l2(conv, spectral);
  return {std::move(spectral), d};
}

namespace detail {

inline void add_common(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--radius-km", cfg.radius_km, "Sphere radius in km")
      ->envname("GREEN_DEFAULT_RADIUS_KM")
      ->capture_default_str();
  sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--output", cfg.output, "Write output to this path instead of stdout");
}

inline void add_points(CLI::App* sub, RunConfig& cfg) {
  sub->add_option("--ld-km", cfg.ld_km, "Rossby radius of deformation in km (list allowed)")->delimiter(',');
  sub->add_option("--gamma-ratio", cfg.gamma_ratio, "Central angle as a multiple of gamma* (list allowed)")
      ->delimiter(',');
  sub->add_option("--cos-gamma", cfg.cos_gamma, "cos of the central angle (list allowed)")->delimiter(',');
  sub->add_option("--ratio-rounding", cfg.ratio_rounding, "Round gamma ratios to binary32 before use")
      ->check(CLI::IsMember({"none", "binary32"}));
}

inline std::ostream& open_output(const RunConfig& cfg, std::ofstream& file, std::ostream& out) {
  if (cfg.output.empty()) return out;
  file.open(cfg.output, std::ios::binary | std::ios::trunc);
  if (!file) throw InvalidInput("cannot write output file '" + cfg.output + "'");
  return file;
}

inline void emit(const Table& t, const RunConfig& cfg, std::ostream& out) {
  std::ofstream file;
  std::ostream& os = open_output(cfg, file, out);
  if (cfg.format == "json") write_json(t, os);
  else write_csv(t, os);
}

}  // namespace detail

/// Parses args (without the program name), runs one command and returns the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Green's function of the screened Poisson equation on the sphere", "sphgreen"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* eval = app.add_subcommand("eval", "Evaluate G at one point");
  detail::add_common(eval, cfg);
  detail::add_points(eval, cfg);
  eval->add_option("--method", cfg.method)->check(CLI::IsMember({"direct", "split", "quadrature", "closed", "auto"}));
  eval->add_option("--precision", cfg.precision)->check(CLI::IsMember({"double", "dd"}));
  eval->add_option("--epsilon", cfg.epsilon, "Bracket-coefficient cutoff for the split sum");
  eval->add_option("--l-trunc", cfg.l_trunc, "Fixed truncation index");
  eval->add_option("--rel-tol", cfg.rel_tol, "Quadrature relative tolerance");
  eval->add_option("--max-subdiv", cfg.max_subdiv, "Quadrature panel budget");

  auto* table = app.add_subcommand("table", "Split sum vs quadrature and closed forms");
  detail::add_common(table, cfg);
  detail::add_points(table, cfg);
  table->add_option("--preset", cfg.preset)->check(CLI::IsMember({"table1", "table2"}));
  table->add_option("--precision", cfg.precision, "Split-sum precision (default dd)")
      ->check(CLI::IsMember({"double", "dd"}));
  table->add_option("--epsilon", cfg.epsilon);
  table->add_option("--l-trunc", cfg.l_trunc);
  table->add_option("--rel-tol", cfg.rel_tol);
  table->add_option("--max-subdiv", cfg.max_subdiv);

  auto* curve = app.add_subcommand("error-curve", "Absolute error of the split sum versus terms");
  detail::add_common(curve, cfg);
  detail::add_points(curve, cfg);
  curve->add_option("--preset", cfg.preset)->check(CLI::IsMember({"fig2"}));
  curve->add_option("--l-max", cfg.l_max, "Largest number of terms (default 100000)");
  curve->add_option("--epsilon", cfg.epsilon, "Bracket cutoff for the reference value (default 1e-30)");

  auto* gg = app.add_subcommand("gg-star", "G, G* and G - G* versus gamma/gamma*");
  detail::add_common(gg, cfg);
  detail::add_points(gg, cfg);
  gg->add_option("--preset", cfg.preset)->check(CLI::IsMember({"fig3", "fig4"}));
  gg->add_option("--precision", cfg.precision)->check(CLI::IsMember({"double", "dd"}));
  gg->add_option("--epsilon", cfg.epsilon);
  gg->add_option("--l-trunc", cfg.l_trunc);

  auto* solve = app.add_subcommand("solve", "Solve the screened Poisson equation on a sphere grid");
  solve->add_option("--radius-km", cfg.radius_km)->envname("GREEN_DEFAULT_RADIUS_KM")->capture_default_str();
  solve->add_option("--output", cfg.output);
  solve->add_option("--ld-km", cfg.ld_km)->delimiter(',');
  solve->add_option("--input", cfg.input, "Forcing field file");
  solve->add_option("--preset", cfg.preset, "Built-in forcing")->check(CLI::IsMember({"y20", "gaussian-bump"}));
  solve->add_option("--method", cfg.method, "spectral, convolution or both");
  solve->add_option("--l-max", cfg.l_max, "Spectral truncation (preset grids are built for it; default 32)");
  solve->add_option("--epsilon", cfg.epsilon, "Split-sum cutoff for the convolution kernel");
  solve->add_option("--self-term", cfg.self_term, "Convolution self-term: subtract or disk")
      ->check(CLI::IsMember({"subtract", "disk"}));

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::config);
  }

  try {
    if (*eval) {
      detail::emit(cmd_eval(cfg), cfg, out);
    } else if (*table) {
      detail::emit(cmd_table(cfg), cfg, out);
    } else if (*curve) {
      detail::emit(cmd_error_curve(cfg, err), cfg, out);
    } else if (*gg) {
      detail::emit(cmd_gg_star(cfg, err), cfg, out);
    } else if (*solve) {
      if (cfg.method == "auto") cfg.method = "spectral";
      auto [field, discrepancy] = cmd_solve(cfg);
      std::ofstream file;
      std::ostream& os = detail::open_output(cfg, file, out);
      write_field(os, field);
      if (discrepancy) {
        (cfg.output.empty() ? err : out) << "relative_l2_discrepancy," << format_double(*discrepancy) << '\n';
      }
    }
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return static_cast<int>(ExitCode::config);
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return static_cast<int>(ExitCode::numerical);
  }
  return static_cast<int>(ExitCode::ok);
}

}  // namespace sphgreen::cli
