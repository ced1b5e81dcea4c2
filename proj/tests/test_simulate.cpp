#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "fixtures.hpp"
#include "mfg_solver.hpp"
#include "simulate.hpp"
#include "utility.hpp"

using namespace ezmfg;
using ezmfg::testing::mixture;
using ezmfg::testing::second_type;
using ezmfg::testing::single;
using ezmfg::testing::worked_type;

namespace {

SimConfig paths(std::size_t n, bool antithetic = false) {
  SimConfig s;
  s.n_paths = n;
  s.antithetic = antithetic;
  return s;
}

// Mean of log X_T per type under independent common noise.
std::vector<SampleStats> terminal_log_wealth(const MfgEquilibrium& eq, const SimConfig& sim) {
  const auto plan = make_sim_plan(eq, sim.substeps);
  return sample_functionals(plan, sim, CommonNoise::PerPath, {}, 1,
                            [](std::size_t, std::span<const double> lx, std::span<const double>,
                               std::span<double> out) { out[0] = lx.back(); });
}

struct ThreadsEnv {
  explicit ThreadsEnv(const char* v) { setenv("EZMFG_THREADS", v, 1); }
  ~ThreadsEnv() { unsetenv("EZMFG_THREADS"); }
};

}  // namespace

TEST_CASE("no investment, no consumption: X_t = x0 e^{rt}") {
  SimPlan plan;
  const std::size_t n = 50;
  for (std::size_t s = 0; s <= n; ++s) {
    plan.times.push_back(s * 0.02);
    plan.grid_index.push_back(s);
  }
  plan.sqrt_dt.assign(n, std::sqrt(0.02));
  plan.common_exposure.assign(n, 0.0);
  plan.drift = {std::vector<double>(n, 0.03 * 0.02)};
  plan.idio_vol = {std::vector<double>(n, 0.0)};
  plan.common_vol = {std::vector<double>(n, 0.0)};
  plan.log_x0 = {std::log(2.0)};
  const auto st = sample_functionals(plan, paths(1000), CommonNoise::PerPath, {}, 2,
                                     [](std::size_t, std::span<const double> lx, std::span<const double>,
                                        std::span<double> out) {
                                       out[0] = std::exp(lx.back());
                                       out[1] = std::exp(lx[25]);
                                     });
  CHECK(st[0].mean[0] == doctest::Approx(2.0 * std::exp(0.03)).epsilon(1e-14));
  CHECK(st[0].mean[1] == doctest::Approx(2.0 * std::exp(0.015)).epsilon(1e-14));
  CHECK(st[0].std_error[0] == 0.0);
}

TEST_CASE("zero volatility exposure gives the ODE wealth") {
  auto a = worked_type();
  a.market.h.assign(100, 0.0);  // pi* = 0
  const auto eq = solve_mfg(single(a));
  const auto st = terminal_log_wealth(eq, paths(2000));
  CHECK(st[0].std_error[0] == 0.0);
  CHECK(st[0].mean[0] == doctest::Approx(eq.log_wealth_drift_integral(0, 1.0)).epsilon(1e-12));
}

TEST_CASE("log-wealth mean identity on the worked example") {
  const auto eq = solve_mfg(single(worked_type()));
  const auto st = terminal_log_wealth(eq, paths(100000));
  const double ref = std::log(eq.population.type(0).x0) + eq.log_wealth_drift_integral(0, 1.0);
  CHECK(std::abs(st[0].mean[0] - ref) <= 3.0 * st[0].std_error[0]);
  CHECK(st[0].std_error[0] > 0.0);
}

TEST_CASE("antithetic sampling keeps the mean and reduces variance") {
  const auto eq = solve_mfg(single(worked_type()));
  const auto plain = terminal_log_wealth(eq, paths(20000));
  const auto anti = terminal_log_wealth(eq, paths(20000, true));
  const double se = std::hypot(plain[0].std_error[0], anti[0].std_error[0]);
  CHECK(std::abs(plain[0].mean[0] - anti[0].mean[0]) <= 3.0 * se);
  CHECK(anti[0].std_error[0] < plain[0].std_error[0]);
  CHECK(anti[0].n_samples == 10000);
}

TEST_CASE("standard error scales like 1/sqrt(n)") {
  const auto eq = solve_mfg(single(worked_type()));
  const double se3 = terminal_log_wealth(eq, paths(1000))[0].std_error[0];
  const double se4 = terminal_log_wealth(eq, paths(10000))[0].std_error[0];
  const double se5 = terminal_log_wealth(eq, paths(100000))[0].std_error[0];
  CHECK(se3 / se4 == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
  CHECK(se4 / se5 == doctest::Approx(std::sqrt(10.0)).epsilon(0.2));
}

TEST_CASE("results depend on the seed only, not on the worker count") {
  const auto eq = solve_mfg(mixture({{0.3, worked_type()}, {0.7, second_type()}}));
  SimConfig sim = paths(5000);
  sim.substeps = 2;
  std::vector<SampleStats> one, four;
  {
    ThreadsEnv env("1");
    one = terminal_log_wealth(eq, sim);
  }
  {
    ThreadsEnv env("4");
    four = terminal_log_wealth(eq, sim);
  }
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(one[k].mean[0] == four[k].mean[0]);
    CHECK(one[k].std_error[0] == four[k].std_error[0]);
  }
  sim.seed += 1;
  CHECK(terminal_log_wealth(eq, sim)[0].mean[0] != one[0].mean[0]);
}

TEST_CASE("sim config checks") {
  const auto g = TimeGrid::uniform(1.0, 100);
  CHECK_THROWS(check_sim_config(paths(1001, true), g));
  CHECK_THROWS(check_sim_config(paths(0), g));
  SimConfig s = paths(10);
  s.dt_report = 0.015;
  CHECK_THROWS(check_sim_config(s, g));
  CHECK(report_indices(g, 0.25) == std::vector<std::size_t>{0, 25, 50, 75, 100});
  CHECK(report_indices(g, 0.0).size() == 101);
}

TEST_CASE("shared common noise is a Brownian path started at 0") {
  const auto eq = solve_mfg(single(worked_type()));
  const auto plan = make_sim_plan(eq, 1);
  const auto w = shared_common_noise(plan, 1);
  CHECK(w.front() == 0.0);
  CHECK(w.size() == plan.n_steps() + 1);
  CHECK(w == shared_common_noise(plan, 1));
  const auto l = common_level(plan, w);
  CHECK(l[10] == doctest::Approx(eq.common_volatility[0] * w[10]).epsilon(1e-12));
}

TEST_CASE("simulate_log_wealth reports the requested times") {
  const auto eq = solve_mfg(single(worked_type()));
  SimConfig sim = paths(64);
  sim.dt_report = 0.5;
  const auto wp = simulate_log_wealth(eq, sim);
  CHECK(wp.times == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(wp.log_x[0].size() == 64);
  CHECK(wp.log_x[0][7][0] == 0.0);
}

TEST_CASE("fixed point without common noise is deterministic") {
  auto a = worked_type();
  a.market.sigma0.assign(100, 0.0);
  auto b = second_type();
  b.market.sigma0.assign(100, 0.0);
  const auto eq = solve_mfg(mixture({{0.3, a}, {0.7, b}}));
  const auto r = fixed_point_residual(eq, paths(1000));
  CHECK(r.pass);
  CHECK(r.statistic <= 1e-6);
  CHECK(r.entries.size() == 101);
}

TEST_CASE("fixed point with theta = 0") {
  auto a = worked_type();
  a.prefs.theta = 0.0;
  SimConfig sim = paths(100000);
  sim.dt_report = 0.1;
  const auto r = fixed_point_residual(solve_mfg(single(a)), sim);
  CHECK(r.pass);
  CHECK(r.statistic <= 3.0);
}

TEST_CASE("fixed point on a heterogeneous population") {
  SimConfig sim = paths(100000);
  sim.dt_report = 0.1;
  std::vector<PathSummary> summary;
  const auto r = fixed_point_residual(solve_mfg(mixture({{0.3, worked_type()}, {0.7, second_type()}})), sim,
                                      &summary);
  CHECK_MESSAGE(r.pass, r.statistic);
  CHECK(r.entries.size() == 11);
  REQUIRE(summary.size() == 2);
  CHECK(summary[1].t == 1.0);
  CHECK(summary[1].var_log_x > 0.0);
}

TEST_CASE("recursion residual: zero volatility") {
  auto a = worked_type();
  a.market.h.assign(100, 0.0);
  auto b = second_type();
  b.market.h.assign(100, 0.0);
  const auto eq = solve_mfg(mixture({{0.5, a}, {0.5, b}}));
  for (std::size_t k = 0; k < 2; ++k) {
    const auto r = mc_recursion_residual(eq, k, paths(200));
    CHECK(r.std_error == 0.0);
    CHECK(std::abs(r.residual) <= 1e-6);
  }
}

TEST_CASE("recursion residual: theta = 0 and a heterogeneous population") {
  auto a = worked_type();
  a.prefs.theta = 0.0;
  const auto r0 = mc_recursion_residual(solve_mfg(single(a)), 0, paths(100000));
  CHECK(std::abs(r0.residual) <= 3.0 * r0.std_error);

  const auto eq = solve_mfg(mixture({{0.3, worked_type()}, {0.7, second_type()}}));
  for (std::size_t k = 0; k < 2; ++k) {
    const auto r = mc_recursion_residual(eq, k, paths(100000));
    CHECK(std::abs(r.residual) <= 3.0 * r.std_error);
    CHECK(r.utility < 0.0);
  }
}

TEST_CASE("best response: eps = 0 is neutral") {
  const auto eq = solve_mfg(single(worked_type()));
  const auto r = best_response_gap(eq, 0, {0.0});
  REQUIRE(r.entries.size() == 2);
  for (const auto& e : r.entries) CHECK(e.estimate == 0.0);
}

TEST_CASE("best response: deviations lose utility quadratically") {
  const auto eq = solve_mfg(single(worked_type()));
  const auto r = best_response_gap(eq, 0, {-0.1, -0.05, -0.01, 0.01, 0.05, 0.1});
  CHECK(r.pass);
  for (const auto& e : r.entries) {
    if (e.label.find("ratio") != std::string::npos) {
      CHECK(e.estimate >= 3.5);
      CHECK(e.estimate <= 4.5);
    } else {
      CHECK(e.estimate < 0.0);
    }
  }
}

TEST_CASE("best response detects a non-optimal strategy") {
  const auto eq = solve_mfg(single(worked_type()));
  auto s = equilibrium_strategy(eq, 0);
  auto c = s.consumption;
  s.consumption = [c](double t) { return 1.3 * c(t); };
  s.consumption_integral = nullptr;
  const auto r = best_response_check(eq.population.type(0), s, equilibrium_externality(eq), eq.grid(),
                                     {-0.1, -0.05, 0.05, 0.1});
  CHECK_FALSE(r.pass);
}
