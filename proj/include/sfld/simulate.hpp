#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sfld/errors.hpp"
#include "sfld/grid.hpp"
#include "sfld/levy.hpp"
#include "sfld/model.hpp"
#include "sfld/rng.hpp"

namespace sfld {

struct JumpEvent {
  double time = 0.0;
  int component = 0;  // 1 = slow, 2 = fast
  double size = 0.0;  // z drawn from the jump distribution
};

/// One simulated trajectory of the coupled system on a uniform time grid.
struct PathPair {
  std::vector<double> t, x, y;
  std::vector<JumpEvent> jumps;
  std::uint64_t seed = 0;
};

/// Frozen-x trajectory of the (virtual or tilted) fast process.
struct FastPath {
  std::vector<double> t, y;
  std::uint64_t seed = 0;
};

struct SimulateOptions {
  bool allow_coarse_dt = false;  // override the dt <= epsilon^alpha guard
  bool log_jumps = true;
};

namespace detail {

inline std::size_t step_count(double t_end, double dt) {
  if (!(dt > 0.0) || !(t_end > 0.0))
    throw InvalidParameterError("simulate: t_end and dt must be positive");
  const double steps = t_end / dt;
  const auto n = static_cast<std::size_t>(std::llround(steps));
  if (n == 0 || std::abs(steps - static_cast<double>(n)) > 1e-9 * steps)
    throw InvalidParameterError("simulate: t_end must be a multiple of dt");
  return n;
}

// Euler step with left-limit coefficients over the full horizon. Jumps within
// a step are applied at their sampled times in order, each seeing the running
// left-limit state; drift, diffusion and compensators use the step-start
// state. Observer receives (step_index, t, X, Y) including the initial state.
template <class Observer>
void run_slow_fast(const CoefficientSet& c, const LevyMeasureModel& nu1,
                   const LevyMeasureModel& nu2, const RegimeParams& regime, double t_end,
                   double dt, double x0, double y0, RngStream& rng,
                   const SimulateOptions& opts, std::vector<JumpEvent>* jump_log,
                   Observer&& observe) {
  const std::size_t n = step_count(t_end, dt);
  const double eps = regime.epsilon;
  const double fast_scale = std::pow(eps, 1.0 - regime.alpha);  // epsilon / delta
  if (dt > regime.delta * (1.0 + 1e-12) && !opts.allow_coarse_dt)
    throw StiffnessError("simulate_slow_fast: dt=" + std::to_string(dt) +
                         " exceeds epsilon^alpha=" + std::to_string(regime.delta) +
                         "; the fast scale is unresolved (set allow_coarse_dt to override)");
  const double rho = c.rho;
  const double rho_bar = std::sqrt(1.0 - rho * rho);
  const double slow_diff = std::sqrt(2.0 * eps);
  const double fast_diff = std::sqrt(2.0 * fast_scale);
  const double sqrt_dt = std::sqrt(dt);

  double X = x0, Y = y0;
  observe(std::size_t{0}, 0.0, X, Y);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * dt;
    const double b1 = c.b1(X, Y), s1 = c.sigma1(X, Y);
    const double b2 = c.b2(X, Y), s2 = c.sigma2(X, Y);
    const double comp1 =
        nu1.is_null() ? 0.0 : levy_integral(nu1, [&](double z) { return c.k1(X, Y, z); });
    const double comp2 =
        nu2.is_null() ? 0.0 : levy_integral(nu2, [&](double z) { return c.k2(X, Y, z); });
    const double dw1 = rng.normal() * sqrt_dt;
    const double dw2 = rng.normal() * sqrt_dt;

    double Xr = X, Yr = Y;  // running state for in-step jump application
    if (!nu1.is_null() || !nu2.is_null()) {
      const JumpBatch batch1 =
          nu1.is_null() ? JumpBatch{} : sample_jump_batch(nu1, dt, 1.0 / eps, rng);
      const JumpBatch batch2 =
          nu2.is_null() ? JumpBatch{} : sample_jump_batch(nu2, dt, fast_scale, rng);
      std::size_t i1 = 0, i2 = 0;
      while (i1 < batch1.times.size() || i2 < batch2.times.size()) {
        const bool take1 = i2 >= batch2.times.size() ||
                           (i1 < batch1.times.size() && batch1.times[i1] <= batch2.times[i2]);
        if (take1) {
          const double z = batch1.sizes[i1];
          Xr += eps * c.k1(Xr, Yr, z);
          if (jump_log && opts.log_jumps) jump_log->push_back({t + batch1.times[i1], 1, z});
          ++i1;
        } else {
          const double z = batch2.sizes[i2];
          Yr += c.k2(Xr, Yr, z);
          if (jump_log && opts.log_jumps) jump_log->push_back({t + batch2.times[i2], 2, z});
          ++i2;
        }
      }
    }
    X = Xr + eps * b1 * dt + slow_diff * s1 * dw1 - dt * comp1;
    Y = Yr + fast_scale * b2 * dt + fast_diff * s2 * (rho * dw1 + rho_bar * dw2) -
        fast_scale * dt * comp2;
    if (!std::isfinite(X) || !std::isfinite(Y))
      throw BlowUpError("simulate_slow_fast: state became non-finite at t=" +
                            std::to_string(t + dt),
                        t);
    observe(j + 1, t + dt, X, Y);
  }
}

// Frozen-x fast process with drift b2(x,.) + drift_tilt(y), diffusion
// sqrt(2) sigma2(x,.) and unit-scale compensated nu2 jumps.
template <class Tilt, class Observer>
void run_fast(const CoefficientSet& c, const LevyMeasureModel& nu2, double x, double t_end,
              double dt, double y0, RngStream& rng, Tilt&& drift_tilt, Observer&& observe) {
  const std::size_t n = step_count(t_end, dt);
  const double rho = c.rho;
  const double rho_bar = std::sqrt(1.0 - rho * rho);
  const double sqrt_dt = std::sqrt(dt);
  const double sqrt2 = std::sqrt(2.0);

  double Y = y0;
  observe(std::size_t{0}, 0.0, Y);
  for (std::size_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(j) * dt;
    const double b2 = c.b2(x, Y) + drift_tilt(Y);
    const double s2 = c.sigma2(x, Y);
    const double comp2 =
        nu2.is_null() ? 0.0 : levy_integral(nu2, [&](double z) { return c.k2(x, Y, z); });
    const double dw1 = rng.normal() * sqrt_dt;
    const double dw2 = rng.normal() * sqrt_dt;
    double Yr = Y;
    if (!nu2.is_null()) {
      const JumpBatch batch = sample_jump_batch(nu2, dt, 1.0, rng);
      for (std::size_t i = 0; i < batch.times.size(); ++i)
        Yr += c.k2(x, Yr, batch.sizes[i]);
    }
    Y = Yr + b2 * dt + sqrt2 * s2 * (rho * dw1 + rho_bar * dw2) - dt * comp2;
    if (!std::isfinite(Y))
      throw BlowUpError("fast process: state became non-finite at t=" + std::to_string(t + dt),
                        t);
    observe(j + 1, t + dt, Y);
  }
}

}  // namespace detail

inline PathPair simulate_slow_fast(const CoefficientSet& c, const LevyMeasureModel& nu1,
                                   const LevyMeasureModel& nu2, const RegimeParams& regime,
                                   double t_end, double dt, double x0, double y0,
                                   RngStream& rng, const SimulateOptions& opts = {}) {
  PathPair path;
  path.seed = rng.seed();
  const std::size_t n = detail::step_count(t_end, dt);
  path.t.reserve(n + 1);
  path.x.reserve(n + 1);
  path.y.reserve(n + 1);
  detail::run_slow_fast(c, nu1, nu2, regime, t_end, dt, x0, y0, rng, opts, &path.jumps,
                        [&](std::size_t, double t, double X, double Y) {
                          path.t.push_back(t);
                          path.x.push_back(X);
                          path.y.push_back(Y);
                        });
  return path;
}

/// Terminal slow state only; avoids path storage for Monte Carlo ensembles.
inline double simulate_slow_terminal(const CoefficientSet& c, const LevyMeasureModel& nu1,
                                     const LevyMeasureModel& nu2, const RegimeParams& regime,
                                     double t_end, double dt, double x0, double y0,
                                     RngStream& rng, const SimulateOptions& opts = {}) {
  double xt = x0;
  SimulateOptions o = opts;
  o.log_jumps = false;
  detail::run_slow_fast(c, nu1, nu2, regime, t_end, dt, x0, y0, rng, o, nullptr,
                        [&](std::size_t, double, double X, double) { xt = X; });
  return xt;
}

inline FastPath simulate_virtual_fast(const CoefficientSet& c, const LevyMeasureModel& nu2,
                                      double x, double t_end, double dt, double y0,
                                      RngStream& rng) {
  FastPath path;
  path.seed = rng.seed();
  path.t.reserve(detail::step_count(t_end, dt) + 1);
  path.y.reserve(path.t.capacity());
  detail::run_fast(c, nu2, x, t_end, dt, y0, rng, [](double) { return 0.0; },
                   [&](std::size_t, double t, double Y) {
                     path.t.push_back(t);
                     path.y.push_back(Y);
                   });
  return path;
}

/// Fast process under the exponential tilt: drift gains 2 rho sigma1 sigma2 p.
/// Bitwise identical to the virtual fast path when p == 0 or rho == 0.
inline FastPath simulate_tilted_fast(const CoefficientSet& c, const LevyMeasureModel& nu2,
                                     double x, double p, double t_end, double dt, double y0,
                                     RngStream& rng) {
  FastPath path;
  path.seed = rng.seed();
  path.t.reserve(detail::step_count(t_end, dt) + 1);
  path.y.reserve(path.t.capacity());
  const double tilt_scale = 2.0 * c.rho * p;
  detail::run_fast(c, nu2, x, t_end, dt, y0, rng,
                   [&](double y) { return tilt_scale * c.sigma1(x, y) * c.sigma2(x, y); },
                   [&](std::size_t, double t, double Y) {
                     path.t.push_back(t);
                     path.y.push_back(Y);
                   });
  return path;
}

/// Normalized occupation times over the given bins; masses (including the
/// under/overflow accumulators) sum to 1.
struct OccupationHistogram {
  std::vector<double> edges;   // ascending, size = bins + 1
  std::vector<double> masses;  // size = bins
  double underflow = 0.0;
  double overflow = 0.0;
  double horizon = 0.0;
};

inline OccupationHistogram occupation_histogram(const FastPath& path,
                                                const std::vector<double>& edges) {
  if (path.t.size() < 2) throw InvalidParameterError("occupation_histogram: path too short");
  if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
    throw InvalidParameterError("occupation_histogram: need ascending bin edges");
  OccupationHistogram h;
  h.edges = edges;
  h.masses.assign(edges.size() - 1, 0.0);
  const double total = path.t.back() - path.t.front();
  h.horizon = total;
  for (std::size_t j = 0; j + 1 < path.t.size(); ++j) {
    const double w = (path.t[j + 1] - path.t[j]) / total;
    const double y = path.y[j];  // piecewise-constant between grid points
    if (y < edges.front()) {
      h.underflow += w;
    } else if (y >= edges.back()) {
      h.overflow += w;
    } else {
      const auto it = std::upper_bound(edges.begin(), edges.end(), y);
      h.masses[static_cast<std::size_t>(it - edges.begin()) - 1] += w;
    }
  }
  return h;
}

/// Reproducibility fingerprint of a path (bit-level).
inline std::uint64_t path_hash(const PathPair& p) {
  std::uint64_t h = fnv1a(p.t);
  h = fnv1a(p.x, h);
  h = fnv1a(p.y, h);
  return fnv1a(&p.seed, sizeof(p.seed), h);
}

}  // namespace sfld
