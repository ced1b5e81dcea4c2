#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "mfg_solver.hpp"
#include "utility.hpp"

using namespace ezmfg;
using ezmfg::testing::mixture;
using ezmfg::testing::second_type;
using ezmfg::testing::single;
using ezmfg::testing::worked_type;

namespace {

PreferenceParams ez22() { return {0.1, 2.0, 2.0, 0.5, 1.0}; }

// Random (c, v) with (1 - gamma) v > 0.
std::pair<double, double> draw(std::mt19937_64& rng, const PreferenceParams& p) {
  std::uniform_real_distribution<double> uc(0.05, 5.0), uv(0.05, 5.0);
  return {uc(rng), uv(rng) / (1.0 - p.gamma)};
}

}  // namespace

TEST_CASE("aggregator examples") {
  CHECK(aggregator(1.0, -1.0, ez22()) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(aggregator(4.0, -1.0, ez22()) == doctest::Approx(0.2).epsilon(1e-14));
  const PreferenceParams power{0.1, 0.5, 2.0, 0.0, 1.0};
  for (double v : {0.0, 1.0, 3.0})
    CHECK(aggregator(2.25, v, power) == doctest::Approx(2 * 0.1 * 1.5 - 0.1 * v).epsilon(1e-14));
}

TEST_CASE("aggregator rejects points outside its domain") {
  CHECK_THROWS_AS(aggregator(1.0, 1.0, ez22()), DomainError);  // (1-gamma) v < 0
  CHECK_THROWS_AS(aggregator(-1.0, -1.0, ez22()), DomainError);
}

TEST_CASE("aggregator derivatives match central differences") {
  std::mt19937_64 rng(5);
  for (const auto& p : {ez22(), PreferenceParams{0.05, 4.0, 1.5, 0.0, 1.0}, PreferenceParams{0.2, 0.6, 3.0, 0.0, 1.0}}) {
    for (int s = 0; s < 100; ++s) {
      auto [c, v] = draw(rng, p);
      const auto d = aggregator_derivs(c, v, p);
      const double hc = 1e-5 * c, hv = 1e-5 * std::abs(v);
      const double fd1 = (aggregator(c + hc, v, p) - aggregator(c - hc, v, p)) / (2 * hc);
      const double fd2 = (aggregator(c, v + hv, p) - aggregator(c, v - hv, p)) / (2 * hv);
      CHECK(std::abs(d.f1 - fd1) <= 1e-6 * std::max(1.0, std::abs(fd1)));
      CHECK(std::abs(d.f2 - fd2) <= 1e-6 * std::max(1.0, std::abs(fd2)));
    }
  }
}

TEST_CASE("f2 sign for gamma = psi = 2") {
  // The v-term of f2 is -3 delta sqrt(c) sqrt(-v) <= 0, so f2 <= -delta theta~.
  const auto p = ez22();
  std::mt19937_64 rng(8);
  for (int s = 0; s < 100; ++s) {
    auto [c, v] = draw(rng, p);
    CHECK(aggregator_derivs(c, v, p).f2 <= -p.delta * p.theta_tilde() + 1e-14);
  }
}

TEST_CASE("theta~ = 1 gives f2 = -delta") {
  const PreferenceParams p{0.13, 0.5, 2.0, 0.0, 1.0};
  std::mt19937_64 rng(9);
  for (int s = 0; s < 50; ++s) {
    auto [c, v] = draw(rng, p);
    CHECK(std::abs(aggregator_derivs(c, v, p).f2 + p.delta) <= 1e-14);
  }
}

TEST_CASE("linear ODE oracle for phi") {
  AgentType a;
  a.prefs = {0.1, 0.5, 2.0, 0.0, 1.0};
  a.market = MarketCoefficients::constant(100, 0.0, 0.0, 0.2, 0.1);
  const auto grid = TimeGrid::uniform(1.0, 100);
  ProportionalStrategy s{std::vector<double>(100, 0.0), [](double) { return 1.0; }, nullptr};
  const auto ext = Externality::deterministic([](double) { return 0.0; }, 0.0, 100);
  const auto u = evaluate_proportional(a, s, ext, grid);
  CHECK(u.phi.front() == doctest::Approx(5.0 / 6.0 * std::exp(-0.6) + 1.0 / 6.0).epsilon(1e-10));
  CHECK(u.phi.back() == 1.0);
}

TEST_CASE("equilibrium strategy reproduces the equilibrium phi") {
  const auto eq = solve_mfg(mixture({{0.3, worked_type()}, {0.7, second_type()}}));
  const auto ext = equilibrium_externality(eq);
  for (std::size_t k = 0; k < 2; ++k) {
    const auto u = evaluate_proportional(eq.population.type(k), equilibrium_strategy(eq, k), ext, eq.grid());
    for (std::size_t i = 0; i < eq.grid().n_points(); ++i) {
      const double ref = equilibrium_phi(eq, k, eq.grid()[i]);
      CHECK(std::abs(u.phi[i] - ref) <= 1e-6 * ref);
    }
  }
}

TEST_CASE("worked example utility") {
  const auto eq = solve_mfg(single(worked_type()));
  const auto u = evaluate_proportional(eq.population.type(0), equilibrium_strategy(eq, 0),
                                       equilibrium_externality(eq), eq.grid());
  CHECK(u.V0 == doctest::Approx(-1.1205674831).epsilon(1e-8));
  CHECK(u.V0 < 0.0);
  for (double p : u.phi) CHECK(p > 0.0);
}

TEST_CASE("x0 scaling multiplies V0 by lambda^(1-gamma)") {
  auto a = worked_type();
  const auto eq = solve_mfg(single(a));
  const auto s = equilibrium_strategy(eq, 0);
  const auto ext = equilibrium_externality(eq);
  const auto base = evaluate_proportional(a, s, ext, eq.grid());
  a.x0 = 3.0;
  const auto scaled = evaluate_proportional(a, s, ext, eq.grid());
  CHECK(scaled.V0 == doctest::Approx(base.V0 * std::pow(3.0, -1.0)).epsilon(1e-13));
  for (std::size_t i = 0; i < base.phi.size(); ++i) CHECK(scaled.phi[i] == base.phi[i]);
}

TEST_CASE("phi(0) increases with the bequest weight") {
  auto a = worked_type();
  const auto eq = solve_mfg(single(a));
  const auto s = equilibrium_strategy(eq, 0);
  const auto ext = equilibrium_externality(eq);
  double prev = -INFINITY;
  for (double alpha : {0.5, 1.0, 2.0}) {
    a.prefs.alpha = alpha;
    const double v = evaluate_proportional(a, s, ext, eq.grid()).phi.front();
    CHECK(v > prev);
    prev = v;
  }
}
