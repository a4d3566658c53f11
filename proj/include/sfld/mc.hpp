#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sfld/errors.hpp"
#include "sfld/model.hpp"
#include "sfld/parallel.hpp"
#include "sfld/rng.hpp"
#include "sfld/simulate.hpp"

namespace sfld {

/// Bounded terminal functional h with declared bounds (the log-transformed
/// functional needs h in C_b).
struct TerminalFunction {
  std::function<double(double)> f;
  double lower_bound = 0.0;
  double upper_bound = 0.0;

  static TerminalFunction clipped_linear(double slope, double lo, double hi) {
    if (!(lo < hi)) throw InvalidParameterError("clipped_linear: need lo < hi");
    return {[slope, lo, hi](double x) { return std::clamp(slope * x, lo, hi); }, lo, hi};
  }
  static TerminalFunction bump(double height, double center, double width) {
    if (!(width > 0.0)) throw InvalidParameterError("bump: width must be positive");
    return {[=](double x) {
              const double u = (x - center) / width;
              return std::abs(u) < 1.0 ? height * (1.0 - u * u) * (1.0 - u * u) : 0.0;
            },
            std::min(0.0, height), std::max(0.0, height)};
  }
  static TerminalFunction tanh_ramp(double scale, double width) {
    if (!(width > 0.0)) throw InvalidParameterError("tanh_ramp: width must be positive");
    return {[=](double x) { return scale * std::tanh(x / width); }, -std::abs(scale),
            std::abs(scale)};
  }
  static TerminalFunction constant(double c) {
    return {[c](double) { return c; }, c, c};
  }
};

/// Monte Carlo estimate of U^eps = eps ln E[e^{h(X_t)/eps}], with the
/// delta-method standard error on the log scale.
struct LogFunctionalEstimate {
  double epsilon = 0.0;
  double t = 0.0;
  double x = 0.0, y = 0.0;
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t paths = 0;
  std::uint64_t seed = 0;
};

struct McOptions {
  double dt = 0.0;           // 0: largest step <= epsilon^alpha dividing t
  unsigned threads = 1;
  bool allow_coarse_dt = false;
};

namespace detail {

// Default Monte Carlo step: resolves the fast scale and divides the horizon.
inline double default_dt(double t, double delta) {
  return t / std::ceil(t / delta - 1e-12);
}

}  // namespace detail

/// Simulates N slow-fast paths and evaluates the log-transformed functional
/// by log-sum-exp (no overflow for any |h|/eps). Deterministic for a fixed
/// seed, independent of the worker count.
inline LogFunctionalEstimate estimate_u_eps(const CoefficientSet& c,
                                            const LevyMeasureModel& nu1,
                                            const LevyMeasureModel& nu2,
                                            const RegimeParams& regime,
                                            const TerminalFunction& h, double t, double x,
                                            double y, std::size_t n_paths, std::uint64_t seed,
                                            const McOptions& opts = {}) {
  if (n_paths < 100)
    throw InvalidParameterError("estimate_u_eps: need at least 100 paths");
  const double dt = opts.dt > 0.0 ? opts.dt : detail::default_dt(t, regime.delta);
  const double eps = regime.epsilon;
  SimulateOptions sim_opts;
  sim_opts.allow_coarse_dt = opts.allow_coarse_dt;
  sim_opts.log_jumps = false;

  std::vector<double> w(n_paths);  // h(X_t) / eps per path
  RngStream root(seed);
  parallel_for(n_paths, opts.threads, [&](std::size_t i) {
    RngStream stream = root.substream(i);
    const double xt =
        simulate_slow_terminal(c, nu1, nu2, regime, t, dt, x, y, stream, sim_opts);
    w[i] = h.f(xt) / eps;
  });

  std::size_t finite = 0;
  double wmax = -std::numeric_limits<double>::infinity();
  for (double v : w)
    if (std::isfinite(v)) {
      wmax = std::max(wmax, v);
      ++finite;
    }
  if (finite == 0) throw ConvergenceError("estimate_u_eps: no path produced a finite value");

  double sum = 0.0, sum_sq = 0.0;
  for (double v : w) {
    if (!std::isfinite(v)) continue;
    const double r = std::exp(v - wmax);
    sum += r;
    sum_sq += r * r;
  }
  const double nf = static_cast<double>(finite);
  const double mean = sum / nf;
  const double var = std::max(0.0, sum_sq / nf - mean * mean) * nf / std::max(1.0, nf - 1.0);

  LogFunctionalEstimate est;
  est.epsilon = eps;
  est.t = t;
  est.x = x;
  est.y = y;
  est.paths = n_paths;
  est.seed = seed;
  est.value = eps * (wmax + std::log(mean));
  est.standard_error = eps * std::sqrt(var / nf) / mean;
  return est;
}

struct ConvergenceRow {
  double epsilon = 0.0;
  double estimate = 0.0;
  double standard_error = 0.0;
  double reference = 0.0;
  double gap = 0.0;
};

/// epsilon-ladder of U^eps estimates against a fixed limit reference U0(t,x).
inline std::vector<ConvergenceRow> convergence_study(
    const CoefficientSet& c, const LevyMeasureModel& nu1, const LevyMeasureModel& nu2,
    double alpha, const std::vector<double>& eps_ladder, const TerminalFunction& h, double t,
    double x, double y, std::size_t n_paths, std::uint64_t seed, double reference,
    const McOptions& opts = {}) {
  if (eps_ladder.empty())
    throw InvalidParameterError("convergence_study: empty epsilon ladder");
  std::vector<ConvergenceRow> rows;
  rows.reserve(eps_ladder.size());
  for (std::size_t k = 0; k < eps_ladder.size(); ++k) {
    const RegimeParams regime(eps_ladder[k], alpha);
    const LogFunctionalEstimate est = estimate_u_eps(
        c, nu1, nu2, regime, h, t, x, y, n_paths, detail::splitmix64(seed + k), opts);
    rows.push_back({est.epsilon, est.value, est.standard_error, reference,
                    std::abs(est.value - reference)});
  }
  return rows;
}

struct TailRateRow {
  double epsilon = 0.0;
  std::size_t hits = 0;
  double frequency = 0.0;
  double rate = 0.0;           // -eps ln(frequency); +inf flagged separately
  bool zero_hits = false;
  double rate_lower_bound = 0.0;  // from the Clopper-Pearson upper frequency bound
};

/// Empirical LDP rates -eps ln P(X_t in [a, b]) down an epsilon ladder.
/// A ladder entry with no hits reports the rate implied by the 97.5%
/// Clopper-Pearson upper bound on the frequency instead of infinity.
inline std::vector<TailRateRow> tail_probability_rate(
    const CoefficientSet& c, const LevyMeasureModel& nu1, const LevyMeasureModel& nu2,
    double alpha, double t, double x0, double y0, double a, double b, std::size_t n_paths,
    const std::vector<double>& eps_ladder, std::uint64_t seed, const McOptions& opts = {}) {
  if (!(a < b)) throw InvalidParameterError("tail_probability_rate: need a < b");
  if (eps_ladder.empty())
    throw InvalidParameterError("tail_probability_rate: empty epsilon ladder");
  std::vector<TailRateRow> rows;
  SimulateOptions sim_opts;
  sim_opts.allow_coarse_dt = opts.allow_coarse_dt;
  sim_opts.log_jumps = false;
  for (std::size_t k = 0; k < eps_ladder.size(); ++k) {
    const RegimeParams regime(eps_ladder[k], alpha);
    const double dt = opts.dt > 0.0 ? opts.dt : detail::default_dt(t, regime.delta);
    RngStream root(detail::splitmix64(seed + k));
    std::vector<unsigned char> hit(n_paths, 0);
    parallel_for(n_paths, opts.threads, [&](std::size_t i) {
      RngStream stream = root.substream(i);
      const double xt =
          simulate_slow_terminal(c, nu1, nu2, regime, t, dt, x0, y0, stream, sim_opts);
      hit[i] = (xt >= a && xt <= b) ? 1 : 0;
    });
    TailRateRow row;
    row.epsilon = regime.epsilon;
    for (unsigned char hbit : hit) row.hits += hbit;
    row.frequency = static_cast<double>(row.hits) / static_cast<double>(n_paths);
    if (row.hits == 0) {
      row.zero_hits = true;
      const double upper = 1.0 - std::pow(0.025, 1.0 / static_cast<double>(n_paths));
      row.rate = std::numeric_limits<double>::infinity();
      row.rate_lower_bound = -regime.epsilon * std::log(upper);
    } else {
      row.rate = -regime.epsilon * std::log(row.frequency);
      row.rate_lower_bound = row.rate;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace sfld
