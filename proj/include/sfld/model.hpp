#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sfld/errors.hpp"
#include "sfld/levy.hpp"

namespace sfld {

using Coefficient2 = std::function<double(double, double)>;          // (x, y)
using JumpKernel = std::function<double(double, double, double)>;    // (x, y, z)

/// Drift/diffusion coefficients and jump kernels of the two-scale system,
/// plus the Brownian correlation rho. Immutable after construction; all
/// evaluators must be pure.
struct CoefficientSet {
  Coefficient2 b1, sigma1, b2, sigma2;
  JumpKernel k1, k2;
  double rho = 0.0;
  std::optional<double> y_period;  // set when every coefficient is y-periodic

  CoefficientSet(Coefficient2 b1, Coefficient2 sigma1, JumpKernel k1, Coefficient2 b2,
                 Coefficient2 sigma2, JumpKernel k2, double rho,
                 std::optional<double> y_period = std::nullopt)
      : b1(std::move(b1)),
        sigma1(std::move(sigma1)),
        b2(std::move(b2)),
        sigma2(std::move(sigma2)),
        k1(std::move(k1)),
        k2(std::move(k2)),
        rho(rho),
        y_period(y_period) {
    if (!(rho > -1.0 && rho < 1.0))
      throw InvalidParameterError("CoefficientSet: rho must lie strictly inside (-1, 1)");
    if (y_period && !(*y_period > 0.0))
      throw InvalidParameterError("CoefficientSet: y_period must be positive");
  }

  static Coefficient2 constant2(double c) {
    return [c](double, double) { return c; };
  }
  static JumpKernel constant3(double c) {
    return [c](double, double, double) { return c; };
  }
  static JumpKernel scaled_z(double c) {
    return [c](double, double, double z) { return c * z; };
  }
};

enum class Regime { Supercritical, Critical, Subcritical };

inline const char* regime_name(Regime r) {
  switch (r) {
    case Regime::Supercritical: return "supercritical";
    case Regime::Critical: return "critical";
    case Regime::Subcritical: return "subcritical";
  }
  return "?";
}

/// Supercritical iff alpha > 2, critical iff alpha == 2 (exact comparison on
/// the stored value), subcritical iff 1 < alpha < 2.
inline Regime classify_regime(double alpha) {
  if (!(alpha > 1.0))
    throw InvalidParameterError("classify_regime: alpha must exceed 1, got " +
                                std::to_string(alpha));
  if (alpha > 2.0) return Regime::Supercritical;
  if (alpha == 2.0) return Regime::Critical;
  return Regime::Subcritical;
}

/// Scale separation parameters: delta = epsilon^alpha and the regime tag are
/// derived on construction.
struct RegimeParams {
  double epsilon;
  double alpha;
  double delta;
  Regime regime;

  RegimeParams(double epsilon, double alpha)
      : epsilon(epsilon), alpha(alpha), delta(std::pow(epsilon, alpha)),
        regime(classify_regime(alpha)) {
    if (!(epsilon > 0.0))
      throw InvalidParameterError("RegimeParams: epsilon must be positive");
  }
};

struct ProbePoint {
  double x = 0.0, y = 0.0;
};

struct ProbePair {
  ProbePoint a, b;
};

/// Empirical Lipschitz/growth certificate over a probe set. These are sanity
/// checks of a configured model, not proofs.
struct ConditionReport {
  double lipschitz_estimate = 0.0;
  double growth_estimate = 0.0;
  std::size_t probe_count = 0;
  std::vector<ProbePoint> violations;  // probes where a coefficient was non-finite
};

namespace detail {

inline bool growth_terms(const CoefficientSet& c, const LevyMeasureModel& nu1,
                         const LevyMeasureModel& nu2, const ProbePoint& pt, double* out) {
  const double b1 = c.b1(pt.x, pt.y), b2 = c.b2(pt.x, pt.y);
  const double s1 = c.sigma1(pt.x, pt.y), s2 = c.sigma2(pt.x, pt.y);
  if (!std::isfinite(b1) || !std::isfinite(b2) || !std::isfinite(s1) || !std::isfinite(s2))
    return false;
  double j1 = 0.0, j2 = 0.0;
  try {
    j1 = levy_integral(nu1, [&](double z) {
      const double k = c.k1(pt.x, pt.y, z);
      return k * k;
    });
    j2 = levy_integral(nu2, [&](double z) {
      const double k = c.k2(pt.x, pt.y, z);
      return k * k;
    });
  } catch (const Error&) {
    return false;
  }
  *out = b1 * b1 + b2 * b2 + s1 * s1 + s2 * s2 + j1 + j2;
  return std::isfinite(*out);
}

}  // namespace detail

/// Empirical estimates of the Lipschitz constant K1 (max over probe pairs of
/// the squared-difference quotient, jump kernels integrated against nu1/nu2)
/// and the growth constant K2. Non-finite coefficient values are recorded in
/// `violations` rather than raised.
inline ConditionReport validate_conditions(const CoefficientSet& c,
                                           const LevyMeasureModel& nu1,
                                           const LevyMeasureModel& nu2,
                                           const std::vector<ProbePair>& probes) {
  if (probes.empty())
    throw InvalidParameterError("validate_conditions: probe list must be nonempty");
  ConditionReport report;
  report.probe_count = probes.size();
  for (const ProbePair& pr : probes) {
    const double dist2 = (pr.b.x - pr.a.x) * (pr.b.x - pr.a.x) +
                         (pr.b.y - pr.a.y) * (pr.b.y - pr.a.y);
    // Growth quotient at both endpoints.
    for (const ProbePoint& pt : {pr.a, pr.b}) {
      double num = 0.0;
      if (!detail::growth_terms(c, nu1, nu2, pt, &num)) {
        report.violations.push_back(pt);
        continue;
      }
      report.growth_estimate =
          std::max(report.growth_estimate, num / (1.0 + pt.x * pt.x + pt.y * pt.y));
    }
    if (dist2 <= 0.0) continue;
    // Lipschitz quotient for the pair.
    auto d2 = [&](const Coefficient2& f) {
      const double v = f(pr.b.x, pr.b.y) - f(pr.a.x, pr.a.y);
      return v * v;
    };
    double num = d2(c.b1) + d2(c.b2) + d2(c.sigma1) + d2(c.sigma2);
    bool ok = std::isfinite(num);
    if (ok) {
      try {
        num += levy_integral(nu1, [&](double z) {
          const double v = c.k1(pr.b.x, pr.b.y, z) - c.k1(pr.a.x, pr.a.y, z);
          return v * v;
        });
        num += levy_integral(nu2, [&](double z) {
          const double v = c.k2(pr.b.x, pr.b.y, z) - c.k2(pr.a.x, pr.a.y, z);
          return v * v;
        });
      } catch (const Error&) {
        ok = false;
      }
    }
    if (!ok || !std::isfinite(num)) {
      report.violations.push_back(pr.a);
      continue;
    }
    report.lipschitz_estimate = std::max(report.lipschitz_estimate, num / dist2);
  }
  return report;
}

/// Max deviation |f(x, y) - f(x, y + period)| over sample points; ~0 when the
/// declared periodicity actually holds.
inline double periodicity_residual(const CoefficientSet& c,
                                   const std::vector<ProbePoint>& samples) {
  if (!c.y_period) return 0.0;
  const double period = *c.y_period;
  double worst = 0.0;
  auto check2 = [&](const Coefficient2& f, const ProbePoint& pt) {
    worst = std::max(worst, std::abs(f(pt.x, pt.y) - f(pt.x, pt.y + period)));
  };
  auto check3 = [&](const JumpKernel& f, const ProbePoint& pt) {
    for (double z : {-1.5, -0.4, 0.7, 2.0})
      worst = std::max(worst, std::abs(f(pt.x, pt.y, z) - f(pt.x, pt.y + period, z)));
  };
  for (const ProbePoint& pt : samples) {
    check2(c.b1, pt);
    check2(c.sigma1, pt);
    check2(c.b2, pt);
    check2(c.sigma2, pt);
    check3(c.k1, pt);
    check3(c.k2, pt);
  }
  return worst;
}

}  // namespace sfld
