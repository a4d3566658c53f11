#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "sfld/levy.hpp"
#include "sfld/rng.hpp"

using namespace sfld;
using Catch::Approx;

namespace {

// Brute-force midpoint Riemann oracle, independent of the adaptive panels.
double riemann(const std::function<double(double)>& f, double a, double b, std::size_t n) {
  const double h = (b - a) / static_cast<double>(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += f(a + (static_cast<double>(i) + 0.5) * h);
  return s * h;
}

double riemann_stable(const LevyMeasureModel& nu, const std::function<double(double)>& f,
                      std::size_t n) {
  const double a = nu.alpha_stab;
  auto dens = [&](double z) { return f(z) * std::pow(std::abs(z), -1.0 - a); };
  double total = 0.0;
  if (nu.side != StableSide::Negative) total += riemann(dens, nu.r_min, nu.r_max, n);
  if (nu.side != StableSide::Positive) total += riemann(dens, -nu.r_max, -nu.r_min, n);
  return total;
}

}  // namespace

TEST_CASE("levy integral kinds", "[levy]") {
  SECTION("null measure integrates everything to zero") {
    const auto nu = LevyMeasureModel::null_measure();
    CHECK(levy_integral(nu, [](double z) { return std::exp(z); }) == 0.0);
    CHECK(levy_mass_check(nu) == 0.0);
  }
  SECTION("atomic sums exactly") {
    const auto nu = LevyMeasureModel::atomic({1.0, -2.0}, {0.5, 2.0});
    CHECK(levy_integral(nu, [](double z) { return z * z; }) == Approx(0.5 + 8.0));
  }
  SECTION("1 ^ z^2 mass is finite for every kind") {
    CHECK(levy_mass_check(LevyMeasureModel::atomic({0.5}, {3.0})) == Approx(0.75));
    const auto nu = LevyMeasureModel::truncated_stable(1.5, 0.01, 10.0);
    const double oracle =
        riemann_stable(nu, [](double z) { return std::min(1.0, z * z); }, 1000000);
    CHECK(levy_mass_check(nu) == Approx(oracle).epsilon(1e-8));
  }
  SECTION("invalid constructions are rejected") {
    CHECK_THROWS_AS(LevyMeasureModel::atomic({0.0}, {1.0}), InvalidParameterError);
    CHECK_THROWS_AS(LevyMeasureModel::atomic({1.0}, {-1.0}), InvalidParameterError);
    CHECK_THROWS_AS(LevyMeasureModel::truncated_stable(2.5, 0.01, 10.0),
                    InvalidParameterError);
    CHECK_THROWS_AS(LevyMeasureModel::truncated_stable(1.5, 10.0, 0.01),
                    InvalidParameterError);
  }
}

TEST_CASE("exponential moment integral", "[levy]") {
  auto id = [](double z) { return z; };
  SECTION("p = 0 vanishes for every measure") {
    CHECK(exp_moment_integral(LevyMeasureModel::null_measure(), id, 0.0) == 0.0);
    CHECK(exp_moment_integral(LevyMeasureModel::atomic({1.0}, {1.0}), id, 0.0) == 0.0);
    CHECK(exp_moment_integral(LevyMeasureModel::truncated_stable(1.5, 0.1, 5.0), id, 0.0) ==
          0.0);
  }
  SECTION("single unit atom: closed form e^p - 1 - p") {
    const auto nu = LevyMeasureModel::atomic({1.0}, {1.0});
    CHECK(exp_moment_integral(nu, id, 1.0) == Approx(std::exp(1.0) - 2.0).epsilon(1e-14));
    CHECK(exp_moment_integral(nu, id, 1.0) == Approx(0.718281828459045).epsilon(1e-12));
  }
  SECTION("truncated stable vs brute-force Riemann oracle") {
    const auto nu = LevyMeasureModel::truncated_stable(1.5, 0.01, 10.0);
    const double p = 0.5;
    const double oracle = riemann_stable(
        nu, [&](double z) { return std::expm1(z * p) - z * p; }, 1000000);
    CHECK(exp_moment_integral(nu, id, p) == Approx(oracle).epsilon(1e-6));
  }
  SECTION("nonnegative and convex in p (random sweep)") {
    RngStream rng(20240901);
    const auto nu_atom = LevyMeasureModel::atomic({0.7, -1.3, 2.0}, {0.4, 0.8, 0.1});
    const auto nu_stab = LevyMeasureModel::truncated_stable(1.3, 0.05, 4.0);
    for (int i = 0; i < 50; ++i) {
      const double scale = 2.0 * rng.uniform() - 1.0;
      auto kernel = [scale](double z) { return scale * z; };
      const LevyMeasureModel& nu = (i % 2 == 0) ? nu_atom : nu_stab;
      const double p1 = 4.0 * rng.uniform() - 2.0;
      const double p2 = 4.0 * rng.uniform() - 2.0;
      const double t = rng.uniform();
      const double v1 = exp_moment_integral(nu, kernel, p1);
      const double v2 = exp_moment_integral(nu, kernel, p2);
      const double vm = exp_moment_integral(nu, kernel, t * p1 + (1.0 - t) * p2);
      REQUIRE(v1 >= 0.0);
      REQUIRE(v2 >= 0.0);
      REQUIRE(vm <= t * v1 + (1.0 - t) * v2 + 1e-10);
    }
  }
}

TEST_CASE("drift correction of the |z| >= 1 tail", "[levy]") {
  SECTION("symmetric truncated stable cancels") {
    const auto nu = LevyMeasureModel::truncated_stable(1.5, 0.01, 10.0);
    CHECK(drift_correction(nu) == Approx(0.0).margin(1e-14));
  }
  SECTION("single atom at 1") {
    CHECK(drift_correction(LevyMeasureModel::atomic({1.0}, {1.0})) == Approx(1.0));
    CHECK(drift_correction(LevyMeasureModel::atomic({0.5}, {1.0})) == 0.0);
  }
  SECTION("one-sided stable on [1, 10] vs Riemann oracle") {
    const auto nu = LevyMeasureModel::truncated_stable(1.5, 1.0, 10.0, StableSide::Positive);
    const double oracle = riemann_stable(nu, [](double z) { return z; }, 4000000);
    CHECK(drift_correction(nu) == Approx(oracle).epsilon(1e-8));
    // closed form: int_1^10 z^{-1/2} dz = 2 (1 - 10^{-1/2})
    CHECK(drift_correction(nu) ==
          Approx(2.0 * (1.0 - 1.0 / std::sqrt(10.0))).epsilon(1e-10));
  }
}

TEST_CASE("compensated increment sampling", "[levy]") {
  auto id = [](double z) { return z; };
  SECTION("null measure returns exactly zero") {
    RngStream rng(7);
    CHECK(sample_compensated_increment(LevyMeasureModel::null_measure(), id, 1.0, 1.0, rng) ==
          0.0);
  }
  SECTION("unit atom: centered with unit variance") {
    const auto nu = LevyMeasureModel::atomic({1.0}, {1.0});
    RngStream rng(123457);
    const std::size_t n = 100000;
    double sum = 0.0, sum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = sample_compensated_increment(nu, id, 1.0, 1.0, rng);
      sum += v;
      sum_sq += v * v;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    // compensated Poisson(1): mean 0, variance dt * int z^2 nu = 1
    CHECK(std::abs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
    CHECK(var == Approx(1.0).epsilon(0.05));
  }
  SECTION("mean shrinks like N^{-1/2} (3-sigma gate at two sizes)") {
    const auto nu = LevyMeasureModel::atomic({1.0, -0.5}, {0.6, 0.8});
    const double var = 0.6 * 1.0 + 0.8 * 0.25;  // dt int z^2 nu
    for (std::size_t n : {2000u, 32000u}) {
      RngStream rng(42 + n);
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        sum += sample_compensated_increment(nu, id, 1.0, 1.0, rng);
      CHECK(std::abs(sum / n) < 3.0 * std::sqrt(var / static_cast<double>(n)));
    }
  }
  SECTION("jump batches are time-sorted within the window") {
    const auto nu = LevyMeasureModel::truncated_stable(1.5, 0.05, 5.0);
    RngStream rng(99);
    const JumpBatch batch = sample_jump_batch(nu, 0.5, 10.0, rng);
    REQUIRE(batch.times.size() == batch.sizes.size());
    for (std::size_t i = 0; i < batch.times.size(); ++i) {
      CHECK(batch.times[i] >= 0.0);
      CHECK(batch.times[i] <= 0.5);
      if (i > 0) CHECK(batch.times[i] >= batch.times[i - 1]);
      CHECK(std::abs(batch.sizes[i]) >= nu.r_min);
      CHECK(std::abs(batch.sizes[i]) <= nu.r_max);
    }
  }
  SECTION("same seed, same draw") {
    const auto nu = LevyMeasureModel::truncated_stable(1.4, 0.02, 8.0);
    RngStream a(5150), b(5150);
    for (int i = 0; i < 10; ++i)
      CHECK(sample_compensated_increment(nu, id, 0.1, 2.0, a) ==
            sample_compensated_increment(nu, id, 0.1, 2.0, b));
  }
}

TEST_CASE("divergent exponential moments are reported", "[levy]") {
  // e^{z p} against a heavy right tail overflows; the error names the tail.
  const auto nu = LevyMeasureModel::truncated_stable(1.5, 0.01, 1e4, StableSide::Positive);
  CHECK_THROWS_AS(exp_moment_integral(nu, [](double z) { return z * z; }, 50.0),
                  DivergenceError);
}
