#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <functional>
#include <vector>

#include "sfld/hjb.hpp"
#include "sfld/rng.hpp"

using namespace sfld;
using Catch::Approx;

namespace {

double quad_H(double, double p) { return p * p; }

}  // namespace

TEST_CASE("lax-friedrichs solve", "[hjb]") {
  SECTION("constant data is preserved exactly") {
    const auto grid = linspace(-3.0, 3.0, 241);
    const auto field = solve_hj(quad_H, [](double) { return 1.25; }, grid, 0.5);
    for (std::size_t it = 0; it < field.t.size(); ++it)
      for (std::size_t ix = 0; ix < grid.size(); ++ix)
        CHECK(field.at(it, ix) == Approx(1.25).margin(1e-12));
  }

  SECTION("linear data rides the Hamiltonian: U = a x + a^2 t") {
    const double a = 1.0;
    const auto grid = linspace(-4.0, 4.0, 401);
    const auto field = solve_hj(quad_H, [a](double x) { return a * x; }, grid, 0.5);
    const std::size_t last = field.t.size() - 1;
    for (std::size_t ix = 0; ix < grid.size(); ++ix) {
      if (std::abs(grid[ix]) > 2.0) continue;  // interior window
      CHECK(field.at(last, ix) == Approx(a * grid[ix] + a * a * 0.5).margin(1e-3));
    }
  }

  SECTION("discrete comparison principle: h1 <= h2 forces U1 <= U2 everywhere") {
    const auto grid = linspace(-3.0, 3.0, 201);
    RngStream rng(13332);
    for (int trial = 0; trial < 5; ++trial) {
      const double c1 = rng.uniform(), c2 = rng.uniform(), w = 0.5 + rng.uniform();
      auto h1 = [=](double x) { return std::tanh(c1 * x) - 0.3; };
      auto h2 = [=](double x) { return std::tanh(c1 * x) + c2 * std::exp(-w * x * x); };
      const auto f1 = solve_hj(quad_H, h1, grid, 0.4);
      const auto f2 = solve_hj(quad_H, h2, grid, 0.4);
      REQUIRE(f1.t.size() == f2.t.size());
      for (std::size_t it = 0; it < f1.t.size(); ++it)
        for (std::size_t ix = 0; ix < grid.size(); ++ix)
          REQUIRE(f1.at(it, ix) <= f2.at(it, ix) + 1e-12);
    }
  }

  SECTION("first-order convergence on a smooth benchmark") {
    // dU/dt = (dU/dx)^2 with U(0,x) = -x^2 has U(t,x) = -x^2/(1+4t).
    auto initial = [](double x) { return -x * x; };
    auto exact = [](double t, double x) { return -x * x / (1.0 + 4.0 * t); };
    HjOptions opts;
    opts.p_lo = -6.0;
    opts.p_hi = 6.0;
    auto max_interior_error = [&](std::size_t n) {
      const auto grid = linspace(-2.0, 2.0, n);
      const auto field = solve_hj(quad_H, initial, grid, 0.25, opts);
      const std::size_t last = field.t.size() - 1;
      double worst = 0.0;
      for (std::size_t ix = 0; ix < grid.size(); ++ix) {
        if (std::abs(grid[ix]) > 1.0) continue;
        worst = std::max(worst, std::abs(field.at(last, ix) - exact(0.25, grid[ix])));
      }
      return worst;
    };
    const double coarse = max_interior_error(401);
    const double fine = max_interior_error(801);
    CHECK(coarse / fine == Approx(2.0).margin(0.4));
  }

  SECTION("translation equivariance for x-independent H") {
    const auto grid = linspace(-4.0, 4.0, 321);
    const double dx = grid[1] - grid[0];
    const double shift = 40.0 * dx;  // grid-aligned shift
    auto bump = [](double x) { return std::exp(-x * x); };
    const auto base = solve_hj(quad_H, bump, grid, 0.3);
    const auto moved = solve_hj(quad_H, [&](double x) { return bump(x - shift); }, grid, 0.3);
    const std::size_t last = base.t.size() - 1;
    for (std::size_t ix = 0; ix < grid.size(); ++ix) {
      if (grid[ix] < -2.0 || grid[ix] + shift > 2.0) continue;
      const std::size_t jx = ix + 40;
      CHECK(moved.at(last, jx) == Approx(base.at(last, ix)).margin(1e-9));
    }
  }

  SECTION("gradient leaving the configured p range raises") {
    const auto grid = linspace(-2.0, 2.0, 101);
    CHECK_THROWS_AS(solve_hj(quad_H, [](double x) { return 10.0 * x; }, grid, 0.1),
                    RangeError);
  }

  SECTION("cfl outside (0, 1] is rejected") {
    HjOptions opts;
    opts.cfl = 1.5;
    CHECK_THROWS_AS(
        solve_hj(quad_H, [](double) { return 0.0; }, linspace(-1.0, 1.0, 51), 0.1, opts),
        InvalidParameterError);
  }
}

TEST_CASE("legendre transform", "[hjb]") {
  SECTION("quadratic: Q(q) = q^2/4 to 1e-8") {
    const auto p = linspace(-3.0, 3.0, 601);
    std::vector<double> H(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) H[k] = p[k] * p[k];
    const auto Q = legendre_transform(p, H, linspace(-4.0, 4.0, 81));
    for (std::size_t j = 0; j < Q.q.size(); ++j) {
      CHECK(Q.Q[j] == Approx(Q.q[j] * Q.q[j] / 4.0).margin(1e-8));
      CHECK(Q.saturated[j] == 0);
    }
  }

  SECTION("zero Hamiltonian: conjugate is 0 at the origin and saturates off it") {
    const auto p = linspace(-2.0, 2.0, 41);
    const std::vector<double> H(p.size(), 0.0);
    const auto Q = legendre_transform(p, H, linspace(-1.0, 1.0, 21));
    for (std::size_t j = 0; j < Q.q.size(); ++j) {
      if (std::abs(Q.q[j]) < 1e-12) {
        CHECK(Q.Q[j] == Approx(0.0).margin(1e-12));
        CHECK(Q.saturated[j] == 0);
      } else {
        CHECK(Q.saturated[j] == 1);  // sup attained at the scan edge
        CHECK(Q.Q[j] == Approx(2.0 * std::abs(Q.q[j])).margin(1e-12));
      }
    }
  }

  SECTION("quartic vs dense-scan oracle at 10^6 points") {
    const auto p = linspace(-3.0, 3.0, 30001);
    std::vector<double> H(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) H[k] = std::pow(p[k], 4);
    const auto qs = linspace(-8.0, 8.0, 33);
    const auto Q = legendre_transform(p, H, qs);
    for (std::size_t j = 0; j < qs.size(); ++j) {
      double oracle = -1e300;
      for (std::size_t i = 0; i < 1000000; ++i) {
        const double pp = -3.0 + 6.0 * static_cast<double>(i) / 999999.0;
        oracle = std::max(oracle, pp * qs[j] - std::pow(pp, 4));
      }
      CHECK(Q.Q[j] == Approx(oracle).margin(1e-6));
    }
  }

  SECTION("non-convex samples are rejected with the violating triple") {
    const auto p = linspace(-1.0, 1.0, 21);
    std::vector<double> H(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) H[k] = -p[k] * p[k];
    CHECK_THROWS_AS(legendre_transform(p, H, linspace(-1.0, 1.0, 11)), ConvexityError);
  }

  SECTION("double transform is the identity on convex input (1e-8)") {
    const auto p = linspace(-3.0, 3.0, 601);
    std::vector<double> H(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) H[k] = p[k] * p[k];
    const auto [qlo, qhi] = slope_range(p, H);
    const auto Q = legendre_transform(p, H, linspace(qlo, qhi, 2401));
    // back-transform on an interior p window (the conjugate of the conjugate)
    const auto pback = linspace(-1.5, 1.5, 41);
    std::vector<double> vals(Q.q.size());
    for (std::size_t k = 0; k < pback.size(); ++k) {
      for (std::size_t j = 0; j < Q.q.size(); ++j)
        vals[j] = pback[k] * Q.q[j] - Q.Q[j];
      bool boundary = false;
      const double hh = sfld::detail::refine_scan_max(Q.q, vals, &boundary);
      CHECK(hh == Approx(pback[k] * pback[k]).margin(1e-8));
    }
  }
}

TEST_CASE("rate function", "[hjb]") {
  const auto p = linspace(-3.0, 3.0, 601);
  std::vector<double> H(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) H[k] = p[k] * p[k];
  const auto Q = legendre_transform(p, H, linspace(-5.0, 5.0, 2001));

  SECTION("quadratic closed form: I = (x0 - x)^2 / (4t)") {
    const RateValue r = rate_function(1.0, 0.0, 1.0, Q);
    CHECK(r.value == Approx(0.25).margin(1e-6));
    CHECK_FALSE(r.saturated);
  }
  SECTION("zero-cost displacement") {
    const RateValue r = rate_function(0.7, 0.7, 2.0, Q);
    CHECK(r.value == Approx(0.0).margin(1e-9));
  }
  SECTION("symmetric Hamiltonian gives a symmetric rate") {
    for (double d : {0.3, 0.9, 1.7}) {
      const RateValue a = rate_function(d, 0.0, 1.3, Q);
      const RateValue b = rate_function(0.0, d, 1.3, Q);
      CHECK(a.value == Approx(b.value).margin(1e-12));
    }
  }
  SECTION("arguments outside the sampled velocities saturate") {
    CHECK(rate_function(30.0, 0.0, 1.0, Q).saturated);
  }
}

TEST_CASE("rate from the linear-data family", "[hjb]") {
  auto H2 = [](double pp) { return pp * pp; };
  const auto slopes = linspace(-3.0, 3.0, 1201);

  SECTION("quadratic closed form") {
    CHECK(rate_from_linear_family(H2, 1.0, 0.0, 1.0, slopes) == Approx(0.25).margin(1e-8));
  }
  SECTION("no displacement, no cost") {
    CHECK(rate_from_linear_family(H2, 0.4, 0.4, 0.7, slopes) == Approx(0.0).margin(1e-9));
  }
  SECTION("agrees with the conjugate route for the quartic on random queries") {
    const auto p = linspace(-3.0, 3.0, 30001);
    std::vector<double> H(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) H[k] = std::pow(p[k], 4);
    const auto Q = legendre_transform(p, H, linspace(-6.0, 6.0, 24001));
    auto H4 = [](double pp) { return std::pow(pp, 4); };
    RngStream rng(345345);
    for (int i = 0; i < 20; ++i) {
      const double x0 = 2.0 * rng.uniform() - 1.0;
      const double x = x0 + 3.0 * (rng.uniform() - 0.5);
      const double t = 0.5 + 2.0 * rng.uniform();
      const double dual = rate_from_linear_family(H4, x, x0, t, slopes);
      // symmetric H: Q((x0 - x)/t) = Q((x - x0)/t)
      const RateValue direct = rate_function(x, x0, t, Q);
      REQUIRE_FALSE(direct.saturated);
      REQUIRE(dual == Approx(direct.value).margin(1e-4));
    }
  }
}

TEST_CASE("hopf-lax oracle", "[hjb]") {
  const auto p = linspace(-6.0, 6.0, 1201);
  std::vector<double> H(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) H[k] = p[k] * p[k];
  const auto Q = legendre_transform(p, H, linspace(-12.0, 12.0, 4801));

  SECTION("t -> 0 recovers the initial condition") {
    auto h = [](double y) { return std::sin(y); };
    const auto scan = linspace(-5.0, 5.0, 4001);
    for (double x : {-0.7, 0.0, 1.3})
      CHECK(hopf_lax(h, Q, 1e-3, x, scan) == Approx(std::sin(x)).margin(1e-3));
  }
  SECTION("linear data: a x + a^2 t") {
    const double a = 1.0;
    auto h = [a](double y) { return a * y; };
    const auto scan = linspace(-30.0, 30.0, 20001);
    for (double x : {-1.0, 0.0, 0.5})
      CHECK(hopf_lax(h, Q, 0.5, x, scan) == Approx(a * x + a * a * 0.5).margin(1e-5));
  }
  SECTION("constant data stays constant") {
    auto h = [](double) { return 2.5; };
    const auto scan = linspace(-5.0, 5.0, 2001);
    CHECK(hopf_lax(h, Q, 0.7, 0.3, scan) == Approx(2.5).margin(1e-9));
  }
  SECTION("sup pinned at the window edge raises a range error") {
    auto h = [](double y) { return y * y; };  // grows faster than the cost
    const auto scan = linspace(-3.0, 3.0, 301);
    CHECK_THROWS_AS(hopf_lax(h, Q, 2.0, 0.0, scan), RangeError);
  }
}
