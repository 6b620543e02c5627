#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sphgreen/errors.hpp"
#include "sphgreen/spectral.hpp"

namespace sphgreen {

/// Field files: a self-describing header
///   # sphere-grid n_theta=<n> n_phi=<n> radius_km=<R>
/// a column header `theta,phi,value`, then one row per node in theta-major
/// order, all numbers printed with %.17e.
class FieldFormatError : public InvalidInput {
public:
  using InvalidInput::InvalidInput;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

inline void write_field(std::ostream& os, const SphereField& field) {
  const SphereGrid& g = *field.grid;
  os << "# sphere-grid n_theta=" << g.n_theta() << " n_phi=" << g.n_phi()
     << " radius_km=" << format_double(g.radius_km()) << '\n';
  os << "theta,phi,value\n";
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto node = g.node(k);
    os << format_double(node.theta) << ',' << format_double(node.phi) << ','
       << format_double(field.samples[k]) << '\n';
  }
}

namespace detail {

inline std::string header_value(const std::string& header, const std::string& key) {
  const auto pos = header.find(key + "=");
  if (pos == std::string::npos) throw FieldFormatError("field header lacks " + key);
  const auto start = pos + key.size() + 1;
  const auto end = header.find_first_of(" \t\r", start);
  return header.substr(start, end == std::string::npos ? std::string::npos : end - start);
}

inline double parse_number(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw FieldFormatError("line " + std::to_string(line) + ": not a number: '" + s + "'");
  }
}

}  // namespace detail

/// Parses a field file and checks it against the grid its header describes:
/// node count, node coordinates (to 1e-12) and finiteness of every value.
inline SphereField read_field(std::istream& is) {
  std::string header;
  if (!std::getline(is, header) || header.rfind("# sphere-grid", 0) != 0) {
    throw FieldFormatError("missing '# sphere-grid' header");
  }
  std::size_t n_theta = 0, n_phi = 0;
  double radius = 0;
  try {
    n_theta = std::stoul(detail::header_value(header, "n_theta"));
    n_phi = std::stoul(detail::header_value(header, "n_phi"));
    radius = std::stod(detail::header_value(header, "radius_km"));
  } catch (const FieldFormatError&) {
    throw;
  } catch (const std::exception&) {
    throw FieldFormatError("malformed field header: " + header);
  }
  if (n_theta == 0 || n_phi == 0 || !(radius > 0)) {
    throw FieldFormatError("field header describes an empty grid or bad radius");
  }
  auto grid = std::make_shared<const SphereGrid>(n_theta, n_phi, radius);

  std::vector<double> values;
  values.reserve(grid->size());
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("theta", 0) == 0) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
    if (cols.size() != 3) {
      throw FieldFormatError("line " + std::to_string(line_no) + ": expected theta,phi,value");
    }
    const std::size_t k = values.size();
    if (k >= grid->size()) {
      throw FieldFormatError("more rows than the " + std::to_string(grid->size()) + " grid nodes");
    }
    const double theta = detail::parse_number(cols[0], line_no);
    const double phi = detail::parse_number(cols[1], line_no);
    const double v = detail::parse_number(cols[2], line_no);
    const auto node = grid->node(k);
    if (std::abs(theta - node.theta) > 1e-12 || std::abs(phi - node.phi) > 1e-12) {
      throw FieldFormatError("line " + std::to_string(line_no) + ": node (" + cols[0] + ", " +
                             cols[1] + ") does not match the grid");
    }
    if (!std::isfinite(v)) {
      throw FieldFormatError("line " + std::to_string(line_no) + ": non-finite value");
    }
    values.push_back(v);
  }
  if (values.size() != grid->size()) {
    throw FieldFormatError("field has " + std::to_string(values.size()) + " rows, grid has " +
                           std::to_string(grid->size()) + " nodes");
  }
  return SphereField(std::move(grid), std::move(values));
}

/// Centre of the Gaussian-bump forcing; away from the poles and from grid symmetry lines.
inline constexpr SphericalPoint kBumpCentre{1.1, 2.3};

/// Unit Gaussian in the angular distance from kBumpCentre, standard deviation 5 gamma*.
inline SphereField gaussian_bump(std::shared_ptr<const SphereGrid> grid, const ShellParams& params) {
  const double sigma = 5 * params.gamma_star();
  return SphereField::sample(std::move(grid), [sigma](const SphericalPoint& x) {
    const double g = angular_separation(x, kBumpCentre);
    return std::exp(-0.5 * (g / sigma) * (g / sigma));
  });
}

/// Named forcing fields: "y20" (the zonal harmonic Y_{2,0}) and "gaussian-bump".
inline SphereField preset_field(const std::string& name, std::shared_ptr<const SphereGrid> grid,
                                const ShellParams& params) {
  if (name == "y20") {
    return SphereField::sample(std::move(grid), [](const SphericalPoint& x) { return real_sph_harm(2, 0, x); });
  }
  if (name == "gaussian-bump") return gaussian_bump(std::move(grid), params);
  throw InvalidInput("unknown field preset '" + name + "' (expected y20 or gaussian-bump)");
}

}  // namespace sphgreen
