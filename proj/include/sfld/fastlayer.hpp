#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "sfld/errors.hpp"
#include "sfld/grid.hpp"
#include "sfld/levy.hpp"
#include "sfld/model.hpp"

namespace sfld {

/// Fast-state domain for the frozen-x analysis: a periodic cell, an explicit
/// truncated line, or a truncated line with automatic bounds fitted to the
/// speed density.
struct YDomain {
  enum class Kind { PeriodicCell, Line, LineAuto };
  Kind kind = Kind::LineAuto;
  double lo = 0.0;
  double hi = 0.0;  // PeriodicCell: hi = lo + period

  static YDomain periodic_cell(double lo, double period) {
    if (!(period > 0.0)) throw InvalidParameterError("YDomain: period must be positive");
    return {Kind::PeriodicCell, lo, lo + period};
  }
  static YDomain line(double lo, double hi) {
    if (!(lo < hi)) throw InvalidParameterError("YDomain: need lo < hi");
    return {Kind::Line, lo, hi};
  }
  static YDomain line_auto() { return {Kind::LineAuto, 0.0, 0.0}; }
};

/// Invariant density of the continuous fast proxy, built from the speed
/// density m = 1/(sigma2^2 s) and normalized so the trapezoid integral is 1.
struct InvariantMeasure {
  std::vector<double> y;
  std::vector<double> density;
  double normalization = 0.0;          // int m dy before normalizing
  YDomain domain;
  double truncation_report = 0.0;      // edge density relative to the peak (line domains)
  double stationarity_residual = 0.0;  // max |int L~f dpi| over the test battery
};

namespace detail {

inline void require_nondegenerate_sigma2(const CoefficientSet& c, double x, double y) {
  const double s2 = c.sigma2(x, y);
  if (!std::isfinite(s2) || std::abs(s2) < 1e-12)
    throw DegeneracyError("sigma2 vanishes at (x=" + std::to_string(x) +
                          ", y=" + std::to_string(y) + ")");
}

}  // namespace detail

/// Scale density s(y) = exp(-int_{y0}^{y} b2/sigma2^2 dr) (anchored at the
/// left grid endpoint; the anchor cancels in the normalized invariant
/// measure) and speed density m(y) = 1/(sigma2^2 s(y)).
inline std::pair<std::vector<double>, std::vector<double>> scale_speed_density(
    const CoefficientSet& c, double x, const std::vector<double>& y_grid) {
  if (y_grid.size() < 2)
    throw InvalidParameterError("scale_speed_density: grid needs at least 2 points");
  std::vector<double> integrand(y_grid.size());
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    detail::require_nondegenerate_sigma2(c, x, y_grid[i]);
    const double s2 = c.sigma2(x, y_grid[i]);
    integrand[i] = c.b2(x, y_grid[i]) / (s2 * s2);
  }
  const std::vector<double> anti = cumulative_trapezoid(y_grid, integrand);
  std::vector<double> s(y_grid.size()), m(y_grid.size());
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    s[i] = std::exp(-anti[i]);
    const double s2 = c.sigma2(x, y_grid[i]);
    m[i] = 1.0 / (s2 * s2 * s[i]);
  }
  return {std::move(s), std::move(m)};
}

namespace detail {

// C^3 compactly supported bump (1-u^2)^4 with analytic derivatives; the
// stationarity battery integrates L~f against the computed density.
struct BumpFn {
  double center, width;
  double value(double y) const {
    const double u = (y - center) / width;
    if (std::abs(u) >= 1.0) return 0.0;
    const double v = 1.0 - u * u;
    return v * v * v * v;
  }
  double d1(double y) const {
    const double u = (y - center) / width;
    if (std::abs(u) >= 1.0) return 0.0;
    const double v = 1.0 - u * u;
    return -8.0 * u * v * v * v / width;
  }
  double d2(double y) const {
    const double u = (y - center) / width;
    if (std::abs(u) >= 1.0) return 0.0;
    const double v = 1.0 - u * u;
    return 8.0 * v * v * (7.0 * u * u - 1.0) / (width * width);
  }
};

inline double stationarity_residual(const CoefficientSet& c, double x,
                                    const std::vector<double>& y,
                                    const std::vector<double>& density) {
  const double lo = y.front(), hi = y.back();
  const double span = hi - lo;
  double worst = 0.0;
  for (double frac : {0.25, 0.4, 0.5, 0.6, 0.75}) {
    const BumpFn f{lo + frac * span, 0.3 * span};
    std::vector<double> g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double s2 = c.sigma2(x, y[i]);
      g[i] = (c.b2(x, y[i]) * f.d1(y[i]) + s2 * s2 * f.d2(y[i])) * density[i];
    }
    worst = std::max(worst, std::abs(trapezoid(y, g)));
  }
  return worst;
}

// Expands a window until the speed density decays at its edges, then returns
// mean +/- 8 standard deviations of a Gaussian fit to m.
inline std::pair<double, double> auto_line_bounds(const CoefficientSet& c, double x) {
  double w = 1.0;
  constexpr double kDecay = 1e-12;
  constexpr double kMaxWidth = 1e6;
  while (w < kMaxWidth) {
    const std::vector<double> grid = linspace(-w, w, 801);
    auto [s, m] = scale_speed_density(c, x, grid);
    const double peak = *std::max_element(m.begin(), m.end());
    if (std::max(m.front(), m.back()) <= kDecay * peak) {
      const double norm = trapezoid(grid, m);
      std::vector<double> ym(grid.size()), y2m(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) ym[i] = grid[i] * m[i];
      const double mean = trapezoid(grid, ym) / norm;
      for (std::size_t i = 0; i < grid.size(); ++i)
        y2m[i] = (grid[i] - mean) * (grid[i] - mean) * m[i];
      const double sd = std::sqrt(std::max(trapezoid(grid, y2m) / norm, 1e-30));
      return {mean - 8.0 * sd, mean + 8.0 * sd};
    }
    w *= 2.0;
  }
  throw NonErgodicError(
      "invariant_measure: speed density does not decay on the line (no normalizable "
      "invariant measure; declare a periodic cell or explicit bounds)");
}

}  // namespace detail

/// Invariant probability density pi = m / int m of the continuous fast proxy
/// on the requested domain. Line domains report the relative edge mass left
/// outside the truncation; the stationarity residual of a smooth compactly
/// supported test battery is recorded as a diagnostic.
inline InvariantMeasure invariant_measure(const CoefficientSet& c, double x, YDomain domain,
                                          std::size_t n_points = 2001) {
  if (n_points < 16) throw InvalidParameterError("invariant_measure: grid too coarse");
  if (domain.kind == YDomain::Kind::LineAuto) {
    auto [lo, hi] = detail::auto_line_bounds(c, x);
    domain = YDomain::line(lo, hi);
  }
  InvariantMeasure pi;
  pi.domain = domain;
  pi.y = linspace(domain.lo, domain.hi, n_points);
  auto [s, m] = scale_speed_density(c, x, pi.y);
  pi.normalization = trapezoid(pi.y, m);
  if (!(pi.normalization > 0.0) || !std::isfinite(pi.normalization))
    throw NonErgodicError("invariant_measure: speed density is not normalizable");
  pi.density.resize(n_points);
  for (std::size_t i = 0; i < n_points; ++i) pi.density[i] = m[i] / pi.normalization;
  if (domain.kind == YDomain::Kind::Line) {
    const double peak = *std::max_element(pi.density.begin(), pi.density.end());
    pi.truncation_report = std::max(pi.density.front(), pi.density.back()) / peak;
  }
  pi.stationarity_residual = detail::stationarity_residual(c, x, pi.y, pi.density);
  return pi;
}

/// V^{x,p}(y) = sigma1(x,y)^2 p^2 + int (e^{k1 p} - 1 - k1 p) nu1(dz).
/// Nonnegative, zero at p = 0.
inline double potential_V(const CoefficientSet& c, const LevyMeasureModel& nu1, double x,
                          double p, double y) {
  const double s1 = c.sigma1(x, y);
  const double jump =
      exp_moment_integral(nu1, [&](double z) { return c.k1(x, y, z); }, p);
  return s1 * s1 * p * p + jump;
}

}  // namespace sfld
