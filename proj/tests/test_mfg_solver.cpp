#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "mfg_solver.hpp"

using namespace ezmfg;
using ezmfg::testing::mixture;
using ezmfg::testing::second_type;
using ezmfg::testing::single;
using ezmfg::testing::worked_type;

namespace {

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s = std::max(s, std::abs(a[i] - b[i]));
  return s;
}

}  // namespace

TEST_CASE("worked example: Z0, pi*, A, B, D, c*(0)") {
  const auto eq = solve_mfg(single(worked_type()));
  CHECK(eq.Z0[0][0] == doctest::Approx(0.025 / 0.95).epsilon(1e-12));
  CHECK(eq.pi_star[0][0] == doctest::Approx(0.526315789).epsilon(1e-8));
  CHECK(eq.pi_star[0][0] == doctest::Approx((0.05 + 0.1 * eq.Z0[0][0]) / 0.1).epsilon(1e-12));
  CHECK(eq.riccati.A[0][0] == doctest::Approx(0.1861911).epsilon(1e-6));
  CHECK(eq.riccati.B[0][0] == doctest::Approx(-0.1241274).epsilon(1e-6));
  CHECK(eq.riccati.D[0] == doctest::Approx(std::pow(0.1, 4.0 / 3.0)).epsilon(1e-12));
  CHECK(eq.c_star[0][0] == doctest::Approx(0.050076).epsilon(1e-5));
  CHECK(eq.c_star[0].back() == 1.0);
  CHECK(eq.consumption(0, 1.0) == doctest::Approx(eq.riccati.D[0]));
}

TEST_CASE("Z0 and pi* special cases") {
  auto a = worked_type();
  a.prefs.theta = 0.0;
  auto eq = solve_mfg(single(a));
  CHECK(eq.Z0[0][0] == 0.0);
  CHECK(eq.pi_star[0][0] == doctest::Approx(0.5).epsilon(1e-14));

  a = worked_type();
  a.market.sigma0.assign(100, 0.0);
  eq = solve_mfg(single(a));
  CHECK(eq.Z0[0][0] == 0.0);

  a = worked_type();
  a.market.h.assign(100, 0.0);
  eq = solve_mfg(single(a));
  for (double p : eq.pi_star[0]) CHECK(p == 0.0);
}

TEST_CASE("D = 1 when delta = alpha = 1") {
  auto a = worked_type();
  a.prefs.delta = 1.0;
  const auto eq = solve_mfg(single(a));
  CHECK(eq.riccati.D[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("Y tilde: inversion and quadrature agree and vanish at T") {
  const auto eq = solve_mfg(mixture({{0.3, worked_type()}, {0.7, second_type()}}));
  const auto p0 = single(worked_type());
  const auto single_eq = solve_mfg(p0);
  CHECK(single_eq.Y_tilde[0][0] == doctest::Approx(0.113835238371).epsilon(1e-10));
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(std::abs(eq.Y_tilde[k].back()) <= 1e-14);
    CHECK(sup_diff(eq.Y_tilde[k], eq.Y_tilde_direct[k]) <= 1e-9);
    for (double y : eq.Y_tilde[k]) CHECK(std::isfinite(y));
  }
}

TEST_CASE("Riccati residual at interior grid points") {
  const auto eq = solve_mfg(mixture({{0.3, worked_type()}, {0.7, second_type()}}));
  const auto& g = eq.grid();
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < g.n_cells(); ++j) {
      const double mid = 0.5 * (g[j] + g[j + 1]);
      const double h = 1e-4 * g.cell_width(j);
      const double y = eq.consumption(k, mid);
      const double dy = (eq.consumption(k, mid + h) - eq.consumption(k, mid - h)) / (2 * h);
      CHECK(std::abs(dy - y * y - eq.riccati.B[k][j] * y) <= 1e-6 * (1 + std::abs(dy)));
    }
  }
}

TEST_CASE("theta = 0: Merton investment and composition-independent consumption") {
  auto a = worked_type();
  a.prefs.theta = 0.0;
  auto b = second_type();
  b.prefs.theta = 0.0;
  const auto alone = solve_mfg(single(a));
  const auto mixed = solve_mfg(mixture({{0.4, a}, {0.6, b}}));
  b.prefs.gamma = 5.0;
  b.market.h.assign(100, 0.2);
  b.prefs.delta = 0.3;
  const auto mixed2 = solve_mfg(mixture({{0.9, a}, {0.1, b}}));
  CHECK(std::abs(alone.pi_star[0][0] - 0.05 / (2 * 0.05)) <= 1e-12);
  CHECK(sup_diff(alone.c_star[0], mixed.c_star[0]) <= 1e-12);
  CHECK(sup_diff(alone.c_star[0], mixed2.c_star[0]) <= 1e-12);
  CHECK(sup_diff(alone.pi_star[0], mixed2.pi_star[0]) <= 1e-12);
}

TEST_CASE("theta -> 0 converges monotonically to the single-agent solution") {
  auto a = worked_type();
  a.prefs.theta = 0.0;
  const auto base = solve_mfg(single(a));
  double prev_pi = INFINITY, prev_c = INFINITY;
  for (double th : {0.1, 0.01, 0.001}) {
    a.prefs.theta = th;
    const auto eq = solve_mfg(single(a));
    const double epi = sup_diff(eq.pi_star[0], base.pi_star[0]);
    const double ec = sup_diff(eq.c_star[0], base.c_star[0]);
    CHECK(epi < prev_pi);
    CHECK(ec < prev_c);
    prev_pi = epi;
    prev_c = ec;
  }
  CHECK(prev_pi < 1e-4);
  CHECK(prev_c < 1e-4);
}

TEST_CASE("scale invariance in x0") {
  auto p = mixture({{0.3, worked_type()}, {0.7, second_type()}});
  const auto eq = solve_mfg(p);
  for (auto& t : p.types) t.type.x0 *= 7.5;
  const auto scaled = solve_mfg(p);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(sup_diff(eq.pi_star[k], scaled.pi_star[k]) == 0.0);
    CHECK(sup_diff(eq.c_star[k], scaled.c_star[k]) == 0.0);
    CHECK(sup_diff(eq.Z0[k], scaled.Z0[k]) == 0.0);
    CHECK(sup_diff(eq.riccati.A[k], scaled.riccati.A[k]) == 0.0);
    CHECK(sup_diff(eq.riccati.B[k], scaled.riccati.B[k]) == 0.0);
    CHECK(eq.riccati.D[k] == scaled.riccati.D[k]);
  }
}

TEST_CASE("identical types give identical outputs") {
  const auto eq = solve_mfg(mixture({{0.5, worked_type()}, {0.5, worked_type()}}));
  const auto one = solve_mfg(single(worked_type()));
  CHECK(sup_diff(eq.c_star[0], eq.c_star[1]) == 0.0);
  CHECK(sup_diff(eq.pi_star[0], eq.pi_star[1]) == 0.0);
  CHECK(sup_diff(eq.c_star[0], one.c_star[0]) <= 1e-14);
}

TEST_CASE("time-varying coefficients respect cell boundaries") {
  auto a = worked_type(4);
  a.market.h = {0.02, 0.05, 0.08, 0.03};
  a.market.r = {0.01, 0.02, 0.03, 0.04};
  const auto eq = solve_mfg(single(a, 1.0, 4));
  for (std::size_t j = 0; j < 4; ++j) {
    auto c = worked_type(4);
    c.market = MarketCoefficients::constant(4, a.market.r[j], a.market.h[j], 0.2, 0.1);
    CHECK(eq.pi_star[0][j] == doctest::Approx(solve_mfg(single(c, 1.0, 4)).pi_star[0][0]).epsilon(1e-14));
  }
  CHECK(eq.c_star[0].back() == 1.0);
}

TEST_CASE("power-utility reduction: two code paths agree") {
  auto a = worked_type();
  a.prefs = {0.1, 0.5, 2.0, 0.4, 1.5};
  auto b = second_type();
  b.prefs = {0.07, 0.8, 1.25, 0.2, 0.8};
  const auto p = mixture({{0.6, a}, {0.4, b}});
  REQUIRE(validate(p, Regime::Alternative).ok());
  const auto eq = solve_mfg(p);
  const auto power = solve_power_consumption(p);
  for (std::size_t k = 0; k < 2; ++k) CHECK(sup_diff(eq.c_star[k], power[k]) <= 1e-10);
  CHECK(a.prefs.theta_tilde() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("fuzz: random valid populations solve to finite outputs") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int solved = 0;
  for (int s = 0; s < 200; ++s) {
    auto a = worked_type(20);
    a.prefs = {0.01 + 0.3 * u(rng), 1.05 + 5 * u(rng), 1.05 + 4 * u(rng), u(rng), 0.2 + 3 * u(rng)};
    a.market = MarketCoefficients::constant(20, 0.05 * u(rng), 0.1 * u(rng), 0.05 + 0.4 * u(rng),
                                            0.3 * u(rng));
    const auto p = single(a, 0.5 + 2 * u(rng), 20);
    if (!validate(p, Regime::Primary).ok()) continue;
    const auto eq = solve_mfg(p);
    ++solved;
    for (double c : eq.c_star[0]) CHECK((std::isfinite(c) && c > 0));
    for (double y : eq.Y_tilde[0]) CHECK(std::isfinite(y));
  }
  CHECK(solved > 150);
}
