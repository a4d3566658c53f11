#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sfld/errors.hpp"
#include "sfld/rng.hpp"

namespace sfld {

enum class MeasureKind { Null, FiniteAtomic, TruncatedStable };

/// Which half-lines a truncated stable measure charges.
enum class StableSide { Both, Positive, Negative };

/// Parametric Levy measure: either a finite sum of atoms w_i * delta_{z_i},
/// a truncated alpha-stable density |z|^{-1-alpha} on r_min <= |z| <= r_max,
/// or the null measure. All kinds have finite total mass, so jumps can be
/// sampled exactly (Poisson count + normalized size distribution).
struct LevyMeasureModel {
  MeasureKind kind = MeasureKind::Null;

  // finite-atomic
  std::vector<double> atoms;   // z_i != 0
  std::vector<double> masses;  // w_i >= 0

  // truncated-stable
  double alpha_stab = 1.5;
  double r_min = 0.01;
  double r_max = 10.0;
  StableSide side = StableSide::Both;

  static LevyMeasureModel null_measure() { return {}; }

  static LevyMeasureModel atomic(std::vector<double> z, std::vector<double> w) {
    if (z.size() != w.size() || z.empty())
      throw InvalidParameterError("atomic measure: atoms/masses size mismatch");
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i] == 0.0) throw InvalidParameterError("atomic measure: atom at z=0");
      if (!(w[i] >= 0.0)) throw InvalidParameterError("atomic measure: negative mass");
    }
    LevyMeasureModel m;
    m.kind = MeasureKind::FiniteAtomic;
    m.atoms = std::move(z);
    m.masses = std::move(w);
    return m;
  }

  static LevyMeasureModel truncated_stable(double alpha, double r_min, double r_max,
                                           StableSide side = StableSide::Both) {
    if (!(alpha > 1.0 && alpha < 2.0))
      throw InvalidParameterError("truncated stable: alpha_stab must lie in (1,2)");
    if (!(r_min > 0.0 && r_min < r_max))
      throw InvalidParameterError("truncated stable: need 0 < r_min < r_max");
    LevyMeasureModel m;
    m.kind = MeasureKind::TruncatedStable;
    m.alpha_stab = alpha;
    m.r_min = r_min;
    m.r_max = r_max;
    m.side = side;
    return m;
  }

  bool is_null() const { return kind == MeasureKind::Null; }

  /// Mass of one half-line of the stable density: int_{r0}^{r1} z^{-1-a} dz.
  double stable_side_mass() const {
    const double a = alpha_stab;
    return (std::pow(r_min, -a) - std::pow(r_max, -a)) / a;
  }

  double total_mass() const {
    switch (kind) {
      case MeasureKind::Null:
        return 0.0;
      case MeasureKind::FiniteAtomic: {
        double s = 0.0;
        for (double w : masses) s += w;
        return s;
      }
      case MeasureKind::TruncatedStable:
        return (side == StableSide::Both ? 2.0 : 1.0) * stable_side_mass();
    }
    return 0.0;
  }
};

namespace detail {

// 15-point Gauss-Legendre rule on [-1, 1].
inline constexpr std::array<double, 15> kGl15Nodes = {
    -9.87992518020485377e-01, -9.37273392400705951e-01, -8.48206583410427206e-01,
    -7.24417731360170070e-01, -5.70972172608538830e-01, -3.94151347077563385e-01,
    -2.01194093997434514e-01, 0.00000000000000000e+00,  2.01194093997434514e-01,
    3.94151347077563385e-01,  5.70972172608538830e-01,  7.24417731360170070e-01,
    8.48206583410427206e-01,  9.37273392400705951e-01,  9.87992518020485377e-01};
inline constexpr std::array<double, 15> kGl15Weights = {
    3.07532419961186465e-02, 7.03660474881080689e-02, 1.07159220467171773e-01,
    1.39570677926153908e-01, 1.66269205816993781e-01, 1.86161000015561878e-01,
    1.98431485327111246e-01, 2.02578241925560898e-01, 1.98431485327111246e-01,
    1.86161000015561878e-01, 1.66269205816993781e-01, 1.39570677926153908e-01,
    1.07159220467171773e-01, 7.03660474881080689e-02, 3.07532419961186465e-02};

template <class F>
double gl15(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < 15; ++i) sum += kGl15Weights[i] * f(mid + half * kGl15Nodes[i]);
  return sum * half;
}

// Adaptive bisection with a GL15 panel rule. The error indicator compares a
// panel against the sum of its halves.
template <class F>
double adaptive_gl(F&& f, double a, double b, double abs_tol, double rel_tol, int depth,
                   const char* what) {
  const double whole = gl15(f, a, b);
  const double m = 0.5 * (a + b);
  const double left = gl15(f, a, m);
  const double right = gl15(f, m, b);
  if (!std::isfinite(whole) || !std::isfinite(left) || !std::isfinite(right))
    throw DivergenceError(std::string(what) + ": non-finite integrand on [" +
                          std::to_string(a) + ", " + std::to_string(b) + "]");
  const double err = std::abs(left + right - whole);
  if (err <= abs_tol + rel_tol * std::abs(left + right)) return left + right;
  if (depth <= 0)
    throw QuadratureError(std::string(what) + ": adaptive quadrature did not converge on [" +
                          std::to_string(a) + ", " + std::to_string(b) + "]");
  return adaptive_gl(f, a, m, 0.5 * abs_tol, rel_tol, depth - 1, what) +
         adaptive_gl(f, m, b, 0.5 * abs_tol, rel_tol, depth - 1, what);
}

// Splits the stable support at |z| = 1 (the compensator's unit-ball boundary)
// and integrates f(z) |z|^{-1-alpha} over each piece adaptively.
template <class F>
double integrate_stable(const LevyMeasureModel& nu, F&& f, double abs_tol, double rel_tol,
                        const char* what) {
  const double a = nu.alpha_stab;
  auto weighted = [&](double z) { return f(z) * std::pow(std::abs(z), -1.0 - a); };
  auto one_piece = [&](double lo, double hi) {
    std::vector<std::pair<double, double>> pieces;
    if (lo < 1.0 && hi > 1.0) {
      pieces.emplace_back(lo, 1.0);
      pieces.emplace_back(1.0, hi);
    } else {
      pieces.emplace_back(lo, hi);
    }
    double sum = 0.0;
    for (auto [p0, p1] : pieces)
      sum += adaptive_gl(weighted, p0, p1, abs_tol, rel_tol, 48, what);
    return sum;
  };
  double total = 0.0;
  if (nu.side != StableSide::Negative) total += one_piece(nu.r_min, nu.r_max);
  if (nu.side != StableSide::Positive) {
    auto mirrored = [&](double z) { return weighted(-z); };
    std::vector<std::pair<double, double>> pieces;
    if (nu.r_min < 1.0 && nu.r_max > 1.0) {
      pieces.emplace_back(nu.r_min, 1.0);
      pieces.emplace_back(1.0, nu.r_max);
    } else {
      pieces.emplace_back(nu.r_min, nu.r_max);
    }
    for (auto [p0, p1] : pieces)
      total += adaptive_gl(mirrored, p0, p1, abs_tol, rel_tol, 48, what);
  }
  return total;
}

}  // namespace detail

/// int f dnu. Exact sum for atomic measures, adaptive Gauss-Legendre panels
/// split at |z| = 1 for the truncated stable density, 0 for the null measure.
template <class F>
double levy_integral(const LevyMeasureModel& nu, F&& f, double abs_tol = 1e-12,
                     double rel_tol = 1e-11, const char* what = "levy_integral") {
  switch (nu.kind) {
    case MeasureKind::Null:
      return 0.0;
    case MeasureKind::FiniteAtomic: {
      double sum = 0.0;
      for (std::size_t i = 0; i < nu.atoms.size(); ++i) {
        const double v = f(nu.atoms[i]);
        if (!std::isfinite(v))
          throw DivergenceError(std::string(what) + ": non-finite integrand at atom z=" +
                                std::to_string(nu.atoms[i]));
        sum += nu.masses[i] * v;
      }
      return sum;
    }
    case MeasureKind::TruncatedStable:
      return detail::integrate_stable(nu, f, abs_tol, rel_tol, what);
  }
  return 0.0;
}

/// Check of the Levy-measure integrability requirement int (1 ^ z^2) nu(dz).
inline double levy_mass_check(const LevyMeasureModel& nu) {
  return levy_integral(nu, [](double z) { return std::min(1.0, z * z); });
}

/// Jump sizes and (sorted) arrival times over one window of length dt,
/// sampled with intensity intensity_scale * nu.
struct JumpBatch {
  std::vector<double> times;  // strictly increasing, in [0, dt]
  std::vector<double> sizes;
  double intensity_scale = 1.0;
};

namespace detail {

inline double sample_stable_side(const LevyMeasureModel& nu, double u) {
  // Inverse CDF of z^{-1-a} on [r_min, r_max].
  const double a = nu.alpha_stab;
  const double lo = std::pow(nu.r_min, -a), hi = std::pow(nu.r_max, -a);
  return std::pow(lo - u * (lo - hi), -1.0 / a);
}

inline double sample_jump_size(const LevyMeasureModel& nu, RngStream& rng) {
  if (nu.kind == MeasureKind::FiniteAtomic) {
    const double total = nu.total_mass();
    double u = rng.uniform() * total;
    for (std::size_t i = 0; i < nu.atoms.size(); ++i) {
      u -= nu.masses[i];
      if (u <= 0.0) return nu.atoms[i];
    }
    return nu.atoms.back();
  }
  // truncated stable
  double sign = 1.0;
  if (nu.side == StableSide::Both)
    sign = rng.uniform() < 0.5 ? 1.0 : -1.0;
  else if (nu.side == StableSide::Negative)
    sign = -1.0;
  return sign * sample_stable_side(nu, rng.uniform());
}

}  // namespace detail

inline JumpBatch sample_jump_batch(const LevyMeasureModel& nu, double dt,
                                   double intensity_scale, RngStream& rng) {
  if (!(dt > 0.0) || !(intensity_scale > 0.0))
    throw InvalidParameterError("sample_jump_batch: dt and intensity_scale must be positive");
  JumpBatch batch;
  batch.intensity_scale = intensity_scale;
  if (nu.is_null()) return batch;
  const std::uint64_t count = rng.poisson(nu.total_mass() * intensity_scale * dt);
  batch.times.resize(count);
  batch.sizes.resize(count);
  for (std::uint64_t i = 0; i < count; ++i) batch.times[i] = rng.uniform() * dt;
  std::sort(batch.times.begin(), batch.times.end());
  for (std::uint64_t i = 0; i < count; ++i) batch.sizes[i] = detail::sample_jump_size(nu, rng);
  return batch;
}

/// One draw of  sum_i kernel(z_i) - intensity_scale * dt * int kernel dnu,
/// i.e. the compensated Poisson integral of `kernel` over a window of
/// length dt. Mean zero over the rng ensemble; exactly 0 for the null measure.
template <class Kernel>
double sample_compensated_increment(const LevyMeasureModel& nu, Kernel&& kernel, double dt,
                                    double intensity_scale, RngStream& rng) {
  if (nu.is_null()) return 0.0;
  const JumpBatch batch = sample_jump_batch(nu, dt, intensity_scale, rng);
  double sum = 0.0;
  for (double z : batch.sizes) sum += kernel(z);
  const double compensator =
      levy_integral(nu, kernel, 1e-12, 1e-11, "sample_compensated_increment");
  return sum - intensity_scale * dt * compensator;
}

/// int (e^{kernel(z) p} - 1 - kernel(z) p) nu(dz). The integrand is
/// pointwise nonnegative, so the result is >= 0 for every p.
template <class Kernel>
double exp_moment_integral(const LevyMeasureModel& nu, Kernel&& kernel, double p) {
  if (p == 0.0) return 0.0;
  auto integrand = [&](double z) {
    const double u = kernel(z) * p;
    return std::expm1(u) - u;
  };
  const double v = levy_integral(nu, integrand, 1e-13, 1e-12, "exp_moment_integral");
  return std::max(v, 0.0);
}

/// int_{|z| >= 1} z nu(dz); the caller owns any time-scale prefactor.
inline double drift_correction(const LevyMeasureModel& nu) {
  switch (nu.kind) {
    case MeasureKind::Null:
      return 0.0;
    case MeasureKind::FiniteAtomic: {
      double s = 0.0;
      for (std::size_t i = 0; i < nu.atoms.size(); ++i)
        if (std::abs(nu.atoms[i]) >= 1.0) s += nu.masses[i] * nu.atoms[i];
      return s;
    }
    case MeasureKind::TruncatedStable: {
      if (nu.r_max <= 1.0) return 0.0;
      const double lo = std::max(nu.r_min, 1.0);
      const double a = nu.alpha_stab;
      auto piece = [&](double sign) {
        return detail::adaptive_gl(
            [&](double z) { return sign * z * std::pow(z, -1.0 - a); }, lo, nu.r_max, 1e-14,
            1e-13, 48, "drift_correction");
      };
      double total = 0.0;
      if (nu.side != StableSide::Negative) total += piece(1.0);
      if (nu.side != StableSide::Positive) total -= piece(1.0);
      return total;
    }
  }
  return 0.0;
}

}  // namespace sfld
