#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <vector>

#include "sfld/errors.hpp"

namespace sfld {

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw InvalidParameterError("linspace: need at least 2 points");
  std::vector<double> out(n);
  const double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + h * static_cast<double>(i);
  out.back() = hi;
  return out;
}

/// Trapezoid rule on a (possibly non-uniform) grid.
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& f) {
  if (x.size() != f.size() || x.size() < 2)
    throw InvalidParameterError("trapezoid: grid/value size mismatch");
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i)
    sum += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  return sum;
}

/// Running trapezoid integral anchored at x[0] (result[0] == 0).
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& x,
                                                const std::vector<double>& f) {
  if (x.size() != f.size() || x.size() < 2)
    throw InvalidParameterError("cumulative_trapezoid: grid/value size mismatch");
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i)
    out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  return out;
}

/// Linear interpolation on an ascending grid; clamps outside the range.
inline double interp_linear(const std::vector<double>& x, const std::vector<double>& f,
                            double xq) {
  if (xq <= x.front()) return f.front();
  if (xq >= x.back()) return f.back();
  std::size_t lo = 0, hi = x.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    (x[mid] <= xq ? lo : hi) = mid;
  }
  const double w = (xq - x[lo]) / (x[lo + 1] - x[lo]);
  return (1.0 - w) * f[lo] + w * f[lo + 1];
}

/// Maximize a unimodal function on [a, b] by golden-section search.
template <class F>
double golden_section_max(F&& f, double a, double b, double tol, double* arg_out = nullptr) {
  constexpr double inv_phi = 0.6180339887498949;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > tol) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    }
  }
  const double xm = 0.5 * (a + b);
  const double fm = f(xm);
  if (arg_out) *arg_out = xm;
  return fm;
}

/// FNV-1a over raw bytes; used for reproducibility hashes of numeric output.
inline std::uint64_t fnv1a(const void* data, std::size_t len,
                           std::uint64_t h = 0xCBF29CE484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::vector<double>& v,
                           std::uint64_t h = 0xCBF29CE484222325ULL) {
  return v.empty() ? h : fnv1a(v.data(), v.size() * sizeof(double), h);
}

}  // namespace sfld
