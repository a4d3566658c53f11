#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sfld/errors.hpp"
#include "sfld/grid.hpp"
#include "sfld/hamiltonian.hpp"

namespace sfld {

/// U(t, x) on a space-time grid from the explicit monotone solve.
struct SolutionField {
  std::vector<double> t, x;
  std::vector<double> u;  // row-major: u[it * x.size() + ix]
  double cfl = 0.0;
  double theta = 0.0;  // numerical viscosity actually used

  double at(std::size_t it, std::size_t ix) const { return u[it * x.size() + ix]; }
};

struct HjOptions {
  double cfl = 0.9;
  // p range over which |dH/dp| is bounded for the scheme's viscosity; kept
  // independent of the initial data so two solves of different data share
  // identical scheme parameters (the discrete comparison property needs that).
  double p_lo = -5.0;
  double p_hi = 5.0;
  std::size_t p_samples = 201;
  double instability_factor = 10.0;
};

namespace detail {

template <class H>
double max_dh_dp(H&& ham, const std::vector<double>& x_grid, const HjOptions& o) {
  const std::vector<double> ps = linspace(o.p_lo, o.p_hi, o.p_samples);
  double lip = 0.0;
  // sampling a few x positions is enough for a bound used only as viscosity
  std::vector<double> xs;
  for (std::size_t i = 0; i < x_grid.size(); i += std::max<std::size_t>(1, x_grid.size() / 8))
    xs.push_back(x_grid[i]);
  xs.push_back(x_grid.back());
  for (double x : xs) {
    double prev = ham(x, ps[0]);
    for (std::size_t k = 1; k < ps.size(); ++k) {
      const double cur = ham(x, ps[k]);
      lip = std::max(lip, std::abs(cur - prev) / (ps[k] - ps[k - 1]));
      prev = cur;
    }
  }
  return lip;
}

}  // namespace detail

/// Explicit Lax-Friedrichs solve of  dU/dt = H(x, dU/dx),  U(0,.) = h.
/// Central gradient plus numerical viscosity theta >= dt * max|H_p| / dx
/// makes the update monotone in the stencil values, which is the discrete
/// counterpart of the comparison principle. Boundary values use gradient
/// extrapolation; keep reported values several cells away from the edges.
template <class H>
SolutionField solve_hj(H&& ham, const std::function<double(double)>& h0,
                       const std::vector<double>& x_grid, double t_end,
                       const HjOptions& opts = {}) {
  detail::check_uniform(x_grid, "solve_hj");
  if (!(opts.cfl > 0.0 && opts.cfl <= 1.0))
    throw InvalidParameterError("solve_hj: cfl must lie in (0, 1]");
  if (!(t_end > 0.0)) throw InvalidParameterError("solve_hj: t_end must be positive");
  const std::size_t n = x_grid.size();
  const double dx = x_grid[1] - x_grid[0];
  const double lip = detail::max_dh_dp(ham, x_grid, opts);
  double dt = lip > 1e-14 ? opts.cfl * dx / lip : t_end;
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-12));
  dt = t_end / static_cast<double>(steps);
  const double theta = std::min(1.0, std::max(dt * lip / dx, 1e-14));

  SolutionField field;
  field.cfl = opts.cfl;
  field.theta = theta;
  field.x = x_grid;
  field.t.resize(steps + 1);
  field.u.assign((steps + 1) * n, 0.0);
  std::vector<double> cur(n), next(n);
  double data_lo = std::numeric_limits<double>::infinity(), data_hi = -data_lo;
  for (std::size_t i = 0; i < n; ++i) {
    cur[i] = h0(x_grid[i]);
    data_lo = std::min(data_lo, cur[i]);
    data_hi = std::max(data_hi, cur[i]);
  }
  double h_at_zero = 0.0;
  for (double x : x_grid) h_at_zero = std::max(h_at_zero, std::abs(ham(x, 0.0)));
  const double blow_limit =
      opts.instability_factor * (std::max(std::abs(data_lo), std::abs(data_hi)) + 1.0 +
                                 h_at_zero * t_end);
  std::copy(cur.begin(), cur.end(), field.u.begin());
  field.t[0] = 0.0;

  for (std::size_t step = 1; step <= steps; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      // gradient-extrapolated ghosts
      const double um = i > 0 ? cur[i - 1] : 2.0 * cur[0] - cur[1];
      const double up = i + 1 < n ? cur[i + 1] : 2.0 * cur[n - 1] - cur[n - 2];
      const double grad = (up - um) / (2.0 * dx);
      if (grad < opts.p_lo - 1e-9 || grad > opts.p_hi + 1e-9)
        throw RangeError("solve_hj: gradient " + std::to_string(grad) +
                         " left the configured p range [" + std::to_string(opts.p_lo) + ", " +
                         std::to_string(opts.p_hi) + "]; extend it");
      next[i] = cur[i] + dt * ham(x_grid[i], grad) + 0.5 * theta * (up - 2.0 * cur[i] + um);
      if (!std::isfinite(next[i]) || std::abs(next[i]) > blow_limit)
        throw CflError("solve_hj: instability detected at t=" +
                       std::to_string(static_cast<double>(step) * dt) +
                       ", x=" + std::to_string(x_grid[i]) + "; reduce cfl");
    }
    cur.swap(next);
    field.t[step] = static_cast<double>(step) * dt;
    std::copy(cur.begin(), cur.end(), field.u.begin() + static_cast<std::ptrdiff_t>(step * n));
  }
  return field;
}

/// Table-backed Hamiltonian for solve_hj; bilinear in (x, p), errors when p
/// leaves the tabulated range.
inline std::function<double(double, double)> table_hamiltonian(const HamiltonianTable& t) {
  return [&t](double x, double p) {
    if (p < t.p.front() - 1e-12 || p > t.p.back() + 1e-12)
      throw RangeError("table_hamiltonian: p=" + std::to_string(p) +
                       " outside tabulated range [" + std::to_string(t.p.front()) + ", " +
                       std::to_string(t.p.back()) + "]");
    const auto locate = [](const std::vector<double>& g, double v) {
      std::size_t lo = 0;
      std::size_t hi = g.size() - 1;
      if (v <= g.front()) return std::pair<std::size_t, double>{0, 0.0};
      if (v >= g.back()) return std::pair<std::size_t, double>{g.size() - 2, 1.0};
      while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (g[mid] <= v ? lo : hi) = mid;
      }
      return std::pair<std::size_t, double>{lo, (v - g[lo]) / (g[lo + 1] - g[lo])};
    };
    const auto [ix, wx] = locate(t.x, x);
    const auto [ip, wp] = locate(t.p, p);
    const double v00 = t.at(ix, ip), v01 = t.at(ix, ip + 1);
    const double v10 = t.x.size() > 1 ? t.at(ix + 1, ip) : v00;
    const double v11 = t.x.size() > 1 ? t.at(ix + 1, ip + 1) : v01;
    return (1.0 - wx) * ((1.0 - wp) * v00 + wp * v01) + wx * ((1.0 - wp) * v10 + wp * v11);
  };
}

/// Legendre transform samples Q(q) = max_p [p q - H(p)], with the discrete
/// argmax refined by the vertex of the parabola through the three samples
/// around it (exact for quadratic H). `saturated[j]` marks conjugate values
/// pinned at the scan boundary, i.e. q outside the sampled slope range.
struct LegendreResult {
  std::vector<double> q, Q;
  std::vector<char> saturated;
};

namespace detail {

// max_k of (value at samples), refined by parabolic interpolation; returns
// true in *boundary when the winner sits on the scan edge.
inline double refine_scan_max(const std::vector<double>& xs, const std::vector<double>& vals,
                              bool* boundary, double* arg_out = nullptr) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < xs.size(); ++k)
    if (vals[k] > vals[best]) best = k;
  if (best == 0 || best + 1 == xs.size()) {
    // ties between an edge and an interior point are not saturation
    const double tie = vals[best] - 1e-14 * (1.0 + std::abs(vals[best]));
    for (std::size_t k = 1; k + 1 < xs.size(); ++k)
      if (vals[k] >= tie) {
        best = k;
        break;
      }
  }
  if (boundary) *boundary = best == 0 || best + 1 == xs.size();
  double value = vals[best];
  double arg = xs[best];
  if (best > 0 && best + 1 < xs.size()) {
    const double fm = vals[best - 1], f0 = vals[best], fp = vals[best + 1];
    const double denom = fm - 2.0 * f0 + fp;
    if (denom < -1e-300) {
      const double shift = 0.5 * (fm - fp) / denom;
      if (std::abs(shift) <= 1.0) {
        const double h = xs[best + 1] - xs[best];
        value = f0 - 0.25 * (fm - fp) * shift;
        arg = xs[best] + shift * h;
      }
    }
  }
  if (arg_out) *arg_out = arg;
  return value;
}

}  // namespace detail

/// Requires convex samples (three-point certificate); throws ConvexityError
/// naming the violating triple otherwise.
inline LegendreResult legendre_transform(const std::vector<double>& p_grid,
                                         const std::vector<double>& H,
                                         const std::vector<double>& q_grid) {
  if (p_grid.size() != H.size() || p_grid.size() < 3)
    throw InvalidParameterError("legendre_transform: sample size mismatch");
  detail::check_uniform(p_grid, "legendre_transform");
  const double scale = 1.0 + *std::max_element(H.begin(), H.end(),
                                               [](double a, double b) {
                                                 return std::abs(a) < std::abs(b);
                                               });
  for (std::size_t k = 1; k + 1 < H.size(); ++k)
    if (H[k - 1] + H[k + 1] - 2.0 * H[k] < -1e-10 * std::abs(scale))
      throw ConvexityError("legendre_transform: samples not convex at p=" +
                           std::to_string(p_grid[k]) + " (triple " +
                           std::to_string(H[k - 1]) + ", " + std::to_string(H[k]) + ", " +
                           std::to_string(H[k + 1]) + ")");
  LegendreResult out;
  out.q = q_grid;
  out.Q.resize(q_grid.size());
  out.saturated.assign(q_grid.size(), 0);
  std::vector<double> vals(p_grid.size());
  for (std::size_t j = 0; j < q_grid.size(); ++j) {
    for (std::size_t k = 0; k < p_grid.size(); ++k)
      vals[k] = p_grid[k] * q_grid[j] - H[k];
    bool boundary = false;
    out.Q[j] = detail::refine_scan_max(p_grid, vals, &boundary);
    out.saturated[j] = boundary ? 1 : 0;
  }
  return out;
}

/// Slope range of the samples; the conjugate is finite exactly on it.
inline std::pair<double, double> slope_range(const std::vector<double>& p_grid,
                                             const std::vector<double>& H) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t k = 1; k < p_grid.size(); ++k) {
    const double s = (H[k] - H[k - 1]) / (p_grid[k] - p_grid[k - 1]);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  return {lo, hi};
}

struct RateValue {
  double value = 0.0;
  bool saturated = false;  // velocity argument left the sampled q range
};

/// I(x, x0, t) = t Q((x0 - x)/t), by monotone (piecewise-linear)
/// interpolation of the conjugate samples.
inline RateValue rate_function(double x, double x0, double t, const LegendreResult& Q) {
  if (!(t > 0.0)) throw InvalidParameterError("rate_function: t must be positive");
  const double q = (x0 - x) / t;
  RateValue r;
  r.saturated = q < Q.q.front() || q > Q.q.back();
  if (!r.saturated) {
    // carry the saturation flag of the nearest samples
    const auto it = std::lower_bound(Q.q.begin(), Q.q.end(), q);
    const std::size_t j = std::min<std::size_t>(
        Q.q.size() - 1, static_cast<std::size_t>(std::distance(Q.q.begin(), it)));
    r.saturated = Q.saturated[j] != 0 || (j > 0 && Q.saturated[j - 1] != 0);
  }
  r.value = t * interp_linear(Q.q, Q.Q, q);
  return r;
}

/// Rate function through the dual route: sup over linear initial data
/// h(x) = a x, whose exact solution is U0 = a x0 + t H(a). Valid for
/// x-independent H; equals t Q((x - x0)/t) by conjugate duality.
inline double rate_from_linear_family(const std::function<double(double)>& H, double x,
                                      double x0, double t, const std::vector<double>& a_grid) {
  if (!(t > 0.0)) throw InvalidParameterError("rate_from_linear_family: t must be positive");
  if (a_grid.size() < 3)
    throw InvalidParameterError("rate_from_linear_family: slope grid too small");
  std::vector<double> vals(a_grid.size());
  for (std::size_t k = 0; k < a_grid.size(); ++k)
    vals[k] = a_grid[k] * (x - x0) - t * H(a_grid[k]);
  bool boundary = false;
  return detail::refine_scan_max(a_grid, vals, &boundary);
}

/// Hopf-Lax value sup_y [h(y) - t Q((x - y)/t)] over a scan grid with
/// parabolic refinement; the exact viscosity solution of dU/dt = H(dU/dx)
/// for x-independent convex H. Velocities outside the sampled conjugate are
/// treated as infinitely expensive.
inline double hopf_lax(const std::function<double(double)>& h, const LegendreResult& Q,
                       double t, double x, const std::vector<double>& y_scan) {
  if (!(t > 0.0)) throw InvalidParameterError("hopf_lax: t must be positive");
  if (y_scan.size() < 3) throw InvalidParameterError("hopf_lax: scan grid too small");
  std::vector<double> vals(y_scan.size());
  for (std::size_t k = 0; k < y_scan.size(); ++k) {
    const double q = (x - y_scan[k]) / t;
    if (q < Q.q.front() || q > Q.q.back()) {
      vals[k] = -std::numeric_limits<double>::infinity();
      continue;
    }
    vals[k] = h(y_scan[k]) - t * interp_linear(Q.q, Q.Q, q);
  }
  if (!std::isfinite(*std::max_element(vals.begin(), vals.end())))
    throw RangeError("hopf_lax: no scan point maps into the sampled conjugate range");
  // replace -inf sentinels for the parabolic step
  std::size_t best = 0;
  for (std::size_t k = 1; k < vals.size(); ++k)
    if (vals[k] > vals[best]) best = k;
  if (best == 0 || best + 1 == y_scan.size())
    throw RangeError("hopf_lax: supremum attained at the scan window edge; widen the window");
  if (!std::isfinite(vals[best - 1]) || !std::isfinite(vals[best + 1])) return vals[best];
  const std::vector<double> xs = {y_scan[best - 1], y_scan[best], y_scan[best + 1]};
  const std::vector<double> fs = {vals[best - 1], vals[best], vals[best + 1]};
  bool boundary = false;
  return detail::refine_scan_max(xs, fs, &boundary);
}

}  // namespace sfld
