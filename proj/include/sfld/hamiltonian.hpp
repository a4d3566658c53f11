#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "sfld/errors.hpp"
#include "sfld/fastlayer.hpp"
#include "sfld/grid.hpp"
#include "sfld/levy.hpp"
#include "sfld/model.hpp"

namespace sfld {

/// Fixed quadrature nodes (z_q, w_q) representing a finite-mass Levy measure;
/// used for matrix stencils where the adaptive rule cannot be (the node set
/// must not depend on the integrand).
struct MeasureQuadrature {
  std::vector<double> z, w;
};

inline MeasureQuadrature fixed_measure_quadrature(const LevyMeasureModel& nu,
                                                  std::size_t panels_per_piece = 8) {
  MeasureQuadrature q;
  switch (nu.kind) {
    case MeasureKind::Null:
      break;
    case MeasureKind::FiniteAtomic:
      q.z = nu.atoms;
      q.w = nu.masses;
      break;
    case MeasureKind::TruncatedStable: {
      const double a = nu.alpha_stab;
      auto add_side = [&](double sign) {
        std::vector<std::pair<double, double>> pieces;
        if (nu.r_min < 1.0 && nu.r_max > 1.0) {
          pieces.emplace_back(nu.r_min, 1.0);
          pieces.emplace_back(1.0, nu.r_max);
        } else {
          pieces.emplace_back(nu.r_min, nu.r_max);
        }
        for (auto [lo, hi] : pieces) {
          // log-spaced panels resolve the r_min singularity
          const double llo = std::log(lo), lhi = std::log(hi);
          for (std::size_t k = 0; k < panels_per_piece; ++k) {
            const double p0 = std::exp(llo + (lhi - llo) * k / panels_per_piece);
            const double p1 = std::exp(llo + (lhi - llo) * (k + 1) / panels_per_piece);
            const double mid = 0.5 * (p0 + p1), half = 0.5 * (p1 - p0);
            for (std::size_t i = 0; i < 15; ++i) {
              const double zz = mid + half * detail::kGl15Nodes[i];
              q.z.push_back(sign * zz);
              q.w.push_back(half * detail::kGl15Weights[i] * std::pow(zz, -1.0 - a));
            }
          }
        }
      };
      if (nu.side != StableSide::Negative) add_side(1.0);
      if (nu.side != StableSide::Positive) add_side(-1.0);
      break;
    }
  }
  return q;
}

/// Dense discretization of the tilted fast generator L^{x,p} on a uniform y
/// grid: first-order upwind drift (the jump compensator folded into the drift
/// to keep off-diagonals nonnegative), central diffusion, and a quadrature
/// stencil for the jump part with periodic wrapping or copy-last boundaries.
/// Row sums vanish by construction, so a Perron eigenpair exists after a
/// diagonal shift.
struct GeneratorMatrix {
  std::size_t n = 0;
  double h = 0.0;
  bool periodic = false;
  std::vector<double> y;
  std::vector<double> a;  // row-major n x n

  double& at(std::size_t i, std::size_t j) { return a[i * n + j]; }
  double at(std::size_t i, std::size_t j) const { return a[i * n + j]; }

  std::vector<double> apply(const std::vector<double>& v) const {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* row = &a[i * n];
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += row[j] * v[j];
      out[i] = s;
    }
    return out;
  }

  double max_row_sum_abs() const {
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += a[i * n + j];
      worst = std::max(worst, std::abs(s));
    }
    return worst;
  }
};

namespace detail {

inline void check_uniform(const std::vector<double>& grid, const char* what) {
  if (grid.size() < 8) throw InvalidParameterError(std::string(what) + ": grid too coarse");
  const double h = grid[1] - grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - grid[i - 1] - h) > 1e-9 * std::abs(h))
      throw InvalidParameterError(std::string(what) + ": grid must be uniform");
}

}  // namespace detail

inline GeneratorMatrix discretize_tilted_generator(const CoefficientSet& c,
                                                   const LevyMeasureModel& nu2, double x,
                                                   double p, const std::vector<double>& y_grid,
                                                   bool periodic) {
  detail::check_uniform(y_grid, "discretize_tilted_generator");
  GeneratorMatrix G;
  G.n = y_grid.size();
  G.h = y_grid[1] - y_grid[0];
  G.periodic = periodic;
  G.y = y_grid;
  G.a.assign(G.n * G.n, 0.0);
  const double period = G.h * static_cast<double>(G.n);
  const MeasureQuadrature quad = fixed_measure_quadrature(nu2);

  for (std::size_t i = 0; i < G.n; ++i) {
    const double yi = y_grid[i];
    const double s2 = c.sigma2(x, yi);
    const double diff = s2 * s2;
    double drift = c.b2(x, yi) + 2.0 * c.rho * c.sigma1(x, yi) * s2 * p;
    // compensator of the jump stencil, handled as upwinded drift
    for (std::size_t qi = 0; qi < quad.z.size(); ++qi)
      drift -= quad.w[qi] * c.k2(x, yi, quad.z[qi]);

    const auto left = i == 0 ? (periodic ? G.n - 1 : 0) : i - 1;
    const auto right = i + 1 == G.n ? (periodic ? 0 : i) : i + 1;
    if (drift >= 0.0) {
      G.at(i, right) += drift / G.h;
      G.at(i, i) -= drift / G.h;
    } else {
      G.at(i, left) += -drift / G.h;
      G.at(i, i) -= -drift / G.h;
    }
    G.at(i, left) += diff / (G.h * G.h);
    G.at(i, right) += diff / (G.h * G.h);
    G.at(i, i) -= 2.0 * diff / (G.h * G.h);

    for (std::size_t qi = 0; qi < quad.z.size(); ++qi) {
      const double w = quad.w[qi];
      double target = yi + c.k2(x, yi, quad.z[qi]);
      if (periodic) {
        target = std::fmod(target - y_grid.front(), period);
        if (target < 0.0) target += period;
        const double cell = target / G.h;
        auto j0 = static_cast<std::size_t>(cell) % G.n;
        const double frac = cell - std::floor(cell);
        const std::size_t j1 = (j0 + 1) % G.n;
        G.at(i, j0) += w * (1.0 - frac);
        G.at(i, j1) += w * frac;
      } else {
        target = std::clamp(target, y_grid.front(), y_grid.back());
        const double cell = (target - y_grid.front()) / G.h;
        auto j0 = std::min(static_cast<std::size_t>(cell), G.n - 2);
        const double frac = std::clamp(cell - static_cast<double>(j0), 0.0, 1.0);
        G.at(i, j0) += w * (1.0 - frac);
        G.at(i, j0 + 1) += w * frac;
      }
      G.at(i, i) -= w;
    }
  }
  return G;
}

struct EigenOptions {
  double tol = 1e-10;               // relative residual target
  std::size_t max_iterations = 100000;
};

/// Principal eigenpair of L^{x,p} + V^{x,p}: the critical-regime H0.
struct EigenSolveResult {
  double lambda = 0.0;
  std::vector<double> eigenfunction;  // e^W on the grid, normalized sup = 1
  std::size_t iterations = 0;
  double residual = 0.0;
};

namespace detail {

struct PowerResult {
  double mu = 0.0;
  std::vector<double> v;
  std::size_t iterations = 0;
  double residual = 0.0;
};

// Power iteration for the Perron root of the (entrywise nonnegative, after
// shifting) matrix A = M + s I, given as a matvec. Converges when the
// residual, measured against the unshifted eigenvalue scale, is below tol.
template <class Matvec>
PowerResult power_iteration(Matvec&& matvec, std::size_t n, double shift, double tol,
                            std::size_t max_iterations, const char* what) {
  PowerResult r;
  r.v.assign(n, 1.0);
  std::vector<double> w(n);
  for (std::size_t iter = 1; iter <= max_iterations; ++iter) {
    w = matvec(r.v);
    for (std::size_t i = 0; i < n; ++i) w[i] += shift * r.v[i];
    double num = 0.0, den = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += r.v[i] * w[i];
      den += r.v[i] * r.v[i];
      norm = std::max(norm, std::abs(w[i]));
    }
    const double mu = num / den;
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i) res = std::max(res, std::abs(w[i] - mu * r.v[i]));
    for (std::size_t i = 0; i < n; ++i) r.v[i] = w[i] / norm;
    r.mu = mu;
    r.iterations = iter;
    r.residual = res;
    if (res <= tol * std::max(1.0, std::abs(mu - shift))) return r;
  }
  throw ConvergenceError(std::string(what) + ": power iteration exhausted " +
                         std::to_string(max_iterations) +
                         " iterations (residual=" + std::to_string(r.residual) + ")");
}

}  // namespace detail

/// Critical-regime Hamiltonian: the principal eigenvalue of L^{x,p} + V^{x,p}
/// with a positive (Perron) eigenfunction, computed by power iteration on the
/// shifted discrete operator. The eigenvalue is bracketed by min V and max V.
inline EigenSolveResult h0_critical_eigen(const CoefficientSet& c, const LevyMeasureModel& nu1,
                                          const LevyMeasureModel& nu2, double x, double p,
                                          const std::vector<double>& y_grid, bool periodic,
                                          const EigenOptions& opts = {}) {
  const GeneratorMatrix G = discretize_tilted_generator(c, nu2, x, p, y_grid, periodic);
  const double row_defect = G.max_row_sum_abs();
  if (row_defect > 1e-10 * (1.0 + 2.0 / (G.h * G.h)))
    throw MonotonicityError("h0_critical_eigen: generator row sums do not vanish (defect=" +
                            std::to_string(row_defect) + "); refine the grid");
  std::vector<double> V(G.n);
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (std::size_t i = 0; i < G.n; ++i) {
    V[i] = potential_V(c, nu1, x, p, y_grid[i]);
    vmin = std::min(vmin, V[i]);
    vmax = std::max(vmax, V[i]);
  }
  double max_diag = 0.0;
  for (std::size_t i = 0; i < G.n; ++i)
    max_diag = std::max(max_diag, std::abs(G.at(i, i) + V[i]));
  const double shift = max_diag + 1.0;

  auto matvec = [&](const std::vector<double>& v) {
    std::vector<double> out = G.apply(v);
    for (std::size_t i = 0; i < G.n; ++i) out[i] += V[i] * v[i];
    return out;
  };
  const detail::PowerResult pr = detail::power_iteration(
      matvec, G.n, shift, opts.tol, opts.max_iterations, "h0_critical_eigen");

  EigenSolveResult result;
  result.lambda = pr.mu - shift;
  result.iterations = pr.iterations;
  result.residual = pr.residual;
  result.eigenfunction = pr.v;
  const double top = *std::max_element(result.eigenfunction.begin(),
                                       result.eigenfunction.end());
  for (double& v : result.eigenfunction) v /= top;
  const double bottom = *std::min_element(result.eigenfunction.begin(),
                                          result.eigenfunction.end());
  if (!(bottom > 0.0))
    throw MonotonicityError(
        "h0_critical_eigen: eigenfunction lost positivity; refine the grid");
  const double slack = 1e-8 * std::max(1.0, std::abs(result.lambda));
  if (result.lambda < vmin - slack || result.lambda > vmax + slack)
    throw ConvergenceError("h0_critical_eigen: eigenvalue " + std::to_string(result.lambda) +
                           " escaped the [min V, max V] bracket");
  return result;
}

/// Stationary probability weights of a discrete generator (left Perron
/// vector of the shifted matrix, normalized to unit sum).
inline std::vector<double> stationary_weights(const GeneratorMatrix& G,
                                              const EigenOptions& opts = {}) {
  double max_diag = 0.0;
  for (std::size_t i = 0; i < G.n; ++i) max_diag = std::max(max_diag, std::abs(G.at(i, i)));
  const double shift = max_diag + 1.0;
  auto matvec_T = [&](const std::vector<double>& v) {
    std::vector<double> out(G.n, 0.0);
    for (std::size_t i = 0; i < G.n; ++i) {
      const double vi = v[i];
      const double* row = &G.a[i * G.n];
      for (std::size_t j = 0; j < G.n; ++j) out[j] += row[j] * vi;
    }
    return out;
  };
  detail::PowerResult pr = detail::power_iteration(matvec_T, G.n, shift, opts.tol,
                                                   opts.max_iterations, "stationary_weights");
  double sum = 0.0;
  for (double v : pr.v) sum += v;
  for (double& v : pr.v) v /= sum;
  return pr.v;
}

/// Donsker-Varadhan certificate: max over candidate occupation measures mu of
/// int V dmu - J^(mu), with J^ the finite-family relaxation of the DV rate
/// functional -inf_f int (L^{x,p} f / f) dmu. With near-stationary candidates
/// this lower-bounds the principal eigenvalue; the eigenvalue itself stays
/// the value of record.
inline double h0_critical_dv_lower_bound(
    const CoefficientSet& c, const LevyMeasureModel& nu1, const LevyMeasureModel& nu2,
    double x, double p, const std::vector<double>& y_grid, bool periodic,
    const std::vector<std::vector<double>>& candidates,
    const std::vector<std::vector<double>>& extra_test_functions = {}) {
  if (candidates.empty())
    throw InvalidParameterError("h0_critical_dv_lower_bound: need at least one candidate");
  const GeneratorMatrix G = discretize_tilted_generator(c, nu2, x, p, y_grid, periodic);
  std::vector<double> V(G.n);
  for (std::size_t i = 0; i < G.n; ++i) V[i] = potential_V(c, nu1, x, p, y_grid[i]);

  // Built-in positive family: constants plus exponential / quadratic tilts.
  double ybar = 0.0;
  for (double y : y_grid) ybar += y;
  ybar /= static_cast<double>(G.n);
  std::vector<std::vector<double>> family;
  family.emplace_back(G.n, 1.0);
  for (double cexp : {-1.0, -0.5, 0.5, 1.0}) {
    std::vector<double> f(G.n);
    for (std::size_t i = 0; i < G.n; ++i) f[i] = std::exp(cexp * (y_grid[i] - ybar));
    family.push_back(std::move(f));
  }
  {
    std::vector<double> f(G.n);
    for (std::size_t i = 0; i < G.n; ++i)
      f[i] = 1.0 + (y_grid[i] - ybar) * (y_grid[i] - ybar);
    family.push_back(std::move(f));
  }
  for (const auto& f : extra_test_functions) {
    if (f.size() != G.n)
      throw InvalidParameterError("h0_critical_dv_lower_bound: test function size mismatch");
    for (double v : f)
      if (!(v > 0.0))
        throw InvalidParameterError(
            "h0_critical_dv_lower_bound: test functions must be strictly positive");
    family.push_back(f);
  }

  std::vector<std::vector<double>> ratios;  // (L f)_i / f_i per family member
  ratios.reserve(family.size());
  for (const auto& f : family) {
    std::vector<double> lf = G.apply(f);
    for (std::size_t i = 0; i < G.n; ++i) lf[i] /= f[i];
    ratios.push_back(std::move(lf));
  }

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& mu : candidates) {
    if (mu.size() != G.n)
      throw InvalidParameterError("h0_critical_dv_lower_bound: candidate size mismatch");
    double sum = 0.0;
    for (double w : mu) {
      if (!(w >= 0.0))
        throw InvalidParameterError("h0_critical_dv_lower_bound: candidate has negative mass");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-8)
      throw InvalidParameterError("h0_critical_dv_lower_bound: candidate not normalized");
    double vterm = 0.0;
    for (std::size_t i = 0; i < G.n; ++i) vterm += mu[i] * V[i];
    double min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& r : ratios) {
      double s = 0.0;
      for (std::size_t i = 0; i < G.n; ++i) s += mu[i] * r[i];
      min_ratio = std::min(min_ratio, s);
    }
    best = std::max(best, vterm + min_ratio);  // J^ = -min_f int (Lf/f) dmu
  }
  return best;
}

/// Supercritical Hamiltonian: V^{x,p} averaged against the invariant measure
/// of the continuous fast proxy.
inline double h0_supercritical(const CoefficientSet& c, const LevyMeasureModel& nu1, double x,
                               double p, const InvariantMeasure& pi,
                               double* quad_error_out = nullptr) {
  std::vector<double> vals(pi.y.size());
  for (std::size_t i = 0; i < pi.y.size(); ++i)
    vals[i] = potential_V(c, nu1, x, p, pi.y[i]) * pi.density[i];
  const double full = trapezoid(pi.y, vals);
  if (quad_error_out) {
    std::vector<double> y2, v2;
    for (std::size_t i = 0; i < pi.y.size(); i += 2) {
      y2.push_back(pi.y[i]);
      v2.push_back(vals[i]);
    }
    if (y2.back() != pi.y.back()) {
      y2.push_back(pi.y.back());
      v2.push_back(vals.back());
    }
    *quad_error_out = std::abs(full - trapezoid(y2, v2));
  }
  return full;
}

inline double h0_supercritical(const CoefficientSet& c, const LevyMeasureModel& nu1, double x,
                               double p, YDomain domain, std::size_t n_points = 2001,
                               double* quad_error_out = nullptr) {
  const InvariantMeasure pi = invariant_measure(c, x, domain, n_points);
  return h0_supercritical(c, nu1, x, p, pi, quad_error_out);
}

/// Subcritical Hamiltonian: max_y V^{x,p}(y), grid scan refined by
/// golden-section search in the winning cell. Ties break toward smallest y.
inline double h0_subcritical(const CoefficientSet& c, const LevyMeasureModel& nu1, double x,
                             double p, const std::vector<double>& y_grid,
                             double* argmax_out = nullptr) {
  if (y_grid.size() < 3) throw InvalidParameterError("h0_subcritical: grid too coarse");
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < y_grid.size(); ++i) {
    const double v = potential_V(c, nu1, x, p, y_grid[i]);
    if (v > best_val) {  // strict: first (smallest-y) maximizer wins ties
      best_val = v;
      best = i;
    }
  }
  const double lo = y_grid[best == 0 ? 0 : best - 1];
  const double hi = y_grid[std::min(best + 1, y_grid.size() - 1)];
  double arg = y_grid[best];
  double refined = best_val;
  if (hi > lo) {
    double cand_arg = arg;
    const double cand = golden_section_max(
        [&](double y) { return potential_V(c, nu1, x, p, y); }, lo, hi,
        1e-10 * std::max(1.0, hi - lo), &cand_arg);
    if (cand > refined) {
      refined = cand;
      arg = cand_arg;
    }
  }
  if (argmax_out) *argmax_out = arg;
  return refined;
}

/// Closed-form corrector slope d_y W of the subcritical expansion, with
/// q = sigma2^2 + (1/2) int k2^2 dnu2. Requires H0 >= V^{x,p}(y).
inline double subcritical_corrector_slope(const CoefficientSet& c,
                                          const LevyMeasureModel& nu1,
                                          const LevyMeasureModel& nu2, double x, double p,
                                          double H0, double y) {
  const double V = potential_V(c, nu1, x, p, y);
  if (H0 < V - 1e-10 * std::max(1.0, std::abs(V)))
    throw InfeasibleError("subcritical_corrector_slope: H0=" + std::to_string(H0) +
                          " < V=" + std::to_string(V) + " at y=" + std::to_string(y) +
                          "; H0 is not the subcritical Hamiltonian for this model");
  const double half_k2sq = 0.5 * levy_integral(nu2, [&](double z) {
    const double k = c.k2(x, y, z);
    return k * k;
  });
  const double s2 = c.sigma2(x, y);
  const double q = s2 * s2 + half_k2sq;
  if (!(q > 0.0))
    throw DegeneracyError("subcritical_corrector_slope: sigma2^2 + delta vanishes at y=" +
                          std::to_string(y));
  const double r = c.rho * c.sigma1(x, y) * s2 * p;
  const double sqrt_q = std::sqrt(q);
  return (std::sqrt(std::max(H0 - V, 0.0) + r * r / q) - r / sqrt_q) / sqrt_q;
}

/// Smooth test function of (x, y) with analytic partial derivatives, for
/// evaluating the prelimit exponential generator.
struct TestFunction2D {
  std::function<double(double, double)> value, dx, dxx, dy, dyy, dxy;
};

/// Every term of the prelimit exponential generator H^{eps,delta} applied to
/// a smooth test function, with delta = epsilon^alpha. The nonlocal terms are
/// evaluated by adaptive quadrature.
inline double eval_prelimit_H(const CoefficientSet& c, const LevyMeasureModel& nu1,
                              const LevyMeasureModel& nu2, double epsilon, double alpha,
                              const TestFunction2D& u, double x, double y) {
  if (!(epsilon > 0.0) || !(alpha > 1.0))
    throw InvalidParameterError("eval_prelimit_H: need epsilon > 0 and alpha > 1");
  const double delta = std::pow(epsilon, alpha);
  const double sqrt_delta = std::sqrt(delta);
  const double b1 = c.b1(x, y), s1 = c.sigma1(x, y);
  const double b2 = c.b2(x, y), s2 = c.sigma2(x, y);
  const double u0 = u.value(x, y);
  const double ux = u.dx(x, y), uy = u.dy(x, y);
  const double uxx = u.dxx(x, y), uyy = u.dyy(x, y), uxy = u.dxy(x, y);

  double total = epsilon * (b1 * ux + s1 * s1 * uxx) + s1 * s1 * ux * ux;
  total += 2.0 * c.rho * s1 * s2 * (ux * uy / sqrt_delta + epsilon * uxy / sqrt_delta);
  total += levy_integral(
      nu1,
      [&](double z) {
        const double k = c.k1(x, y, z);
        return std::expm1((u.value(x + epsilon * k, y) - u0) / epsilon) - k * ux;
      },
      1e-13, 1e-12, "eval_prelimit_H[nu1]");
  total += (epsilon / delta) * (b2 * uy + s2 * s2 * uyy) + (s2 * s2 / delta) * uy * uy;
  total += (epsilon * epsilon / delta) *
           levy_integral(
               nu2,
               [&](double z) {
                 const double k = c.k2(x, y, z);
                 return std::expm1((u.value(x, y + k) - u0) / epsilon) - k * uy / epsilon;
               },
               1e-13, 1e-12, "eval_prelimit_H[nu2]");
  return total;
}

/// H0(x, p) sampled on an (x, p) grid with regime provenance. diag holds the
/// per-entry diagnostic: quadrature error estimate (supercritical), eigen
/// iteration count (critical), or the maximizing y (subcritical).
struct HamiltonianTable {
  Regime regime = Regime::Supercritical;
  std::vector<double> x, p;
  std::vector<double> value;  // row-major: value[ix * p.size() + ip]
  std::vector<double> diag;

  double at(std::size_t ix, std::size_t ip) const { return value[ix * p.size() + ip]; }
};

struct TableOptions {
  YDomain domain = YDomain::line_auto();
  std::size_t y_points = 801;
  EigenOptions eigen;
};

namespace detail {

inline std::vector<double> domain_grid(const YDomain& d, std::size_t n, bool* periodic_out) {
  if (d.kind == YDomain::Kind::PeriodicCell) {
    *periodic_out = true;
    std::vector<double> g(n);
    const double h = (d.hi - d.lo) / static_cast<double>(n);  // cell excludes hi
    for (std::size_t i = 0; i < n; ++i) g[i] = d.lo + h * static_cast<double>(i);
    return g;
  }
  *periodic_out = false;
  return linspace(d.lo, d.hi, n);
}

}  // namespace detail

inline HamiltonianTable build_hamiltonian_table(const CoefficientSet& c,
                                                const LevyMeasureModel& nu1,
                                                const LevyMeasureModel& nu2, Regime regime,
                                                const std::vector<double>& x_grid,
                                                const std::vector<double>& p_grid,
                                                const TableOptions& opts = {}) {
  HamiltonianTable table;
  table.regime = regime;
  table.x = x_grid;
  table.p = p_grid;
  table.value.assign(x_grid.size() * p_grid.size(), 0.0);
  table.diag.assign(table.value.size(), 0.0);
  for (std::size_t ix = 0; ix < x_grid.size(); ++ix) {
    const double x = x_grid[ix];
    YDomain domain = opts.domain;
    if (domain.kind == YDomain::Kind::LineAuto) {
      auto [lo, hi] = detail::auto_line_bounds(c, x);
      domain = YDomain::line(lo, hi);
    }
    bool periodic = false;
    const std::vector<double> y_grid = detail::domain_grid(domain, opts.y_points, &periodic);
    InvariantMeasure pi;
    if (regime == Regime::Supercritical) pi = invariant_measure(c, x, domain, opts.y_points);
    for (std::size_t ip = 0; ip < p_grid.size(); ++ip) {
      const double p = p_grid[ip];
      const std::size_t idx = ix * p_grid.size() + ip;
      switch (regime) {
        case Regime::Supercritical: {
          double err = 0.0;
          table.value[idx] = h0_supercritical(c, nu1, x, p, pi, &err);
          table.diag[idx] = err;
          break;
        }
        case Regime::Critical: {
          const EigenSolveResult r =
              h0_critical_eigen(c, nu1, nu2, x, p, y_grid, periodic, opts.eigen);
          table.value[idx] = r.lambda;
          table.diag[idx] = static_cast<double>(r.iterations);
          break;
        }
        case Regime::Subcritical: {
          double arg = 0.0;
          table.value[idx] = h0_subcritical(c, nu1, x, p, y_grid, &arg);
          table.diag[idx] = arg;
          break;
        }
      }
    }
  }
  return table;
}

/// Extracts H(p) from a table whose rows do not depend on x; errors if they do.
inline std::vector<double> x_independent_profile(const HamiltonianTable& t,
                                                 double tol = 1e-9) {
  std::vector<double> profile(t.p.size());
  for (std::size_t ip = 0; ip < t.p.size(); ++ip) profile[ip] = t.at(0, ip);
  for (std::size_t ix = 1; ix < t.x.size(); ++ix)
    for (std::size_t ip = 0; ip < t.p.size(); ++ip)
      if (std::abs(t.at(ix, ip) - profile[ip]) >
          tol * std::max(1.0, std::abs(profile[ip])))
        throw InvalidParameterError("x_independent_profile: table depends on x");
  return profile;
}

}  // namespace sfld
