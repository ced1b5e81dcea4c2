// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>

#include <fmt/format.h>

#include "config.hpp"
#include "fixtures.hpp"
#include "mfg_solver.hpp"
#include "nplayer_solver.hpp"
#include "output.hpp"
#include "simulate.hpp"
#include "utility.hpp"
#include "verify.hpp"

using namespace ezmfg;
using ezmfg::testing::mixture;
using ezmfg::testing::second_type;
using ezmfg::testing::single;
using ezmfg::testing::worked_type;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    detail += (detail.empty() ? "" : "; ") + what + (ok ? "" : " [failed]");
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RunConfig config(const char* name) { return load_config(std::string(EZMFG_CONFIG_DIR) + "/" + name); }

SimConfig paths(std::size_t n, std::uint64_t seed) {
  SimConfig s;
  s.n_paths = n;
  s.seed = seed;
  s.dt_report = 0.1;
  return s;
}

Outcome riccati_certification() {
  Outcome o;
  auto certify = [](const Population& p, double& sup, double& secs) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = verify_riccati(solve_mfg(p));
    secs = seconds_since(t0);
    sup = r.statistic;
    return r.pass && secs < 1.0;
  };
  double sup = 0, secs = 0;
  o.require(certify(single(worked_type()), sup, secs), fmt::format("worked sup {:.2e} in {:.3f}s", sup, secs));

  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int done = 0, ok = 0;
  double worst = 0, slowest = 0;
  while (done < 100) {
    const std::size_t cells = 10 + static_cast<std::size_t>(190 * u(rng));
    auto a = worked_type(cells);
    a.prefs = {0.02 + 0.2 * u(rng), 1.5 + 4.5 * u(rng), 1.2 + 2.8 * u(rng), u(rng), 0.5 + 1.5 * u(rng)};
    a.market = MarketCoefficients::constant(cells, 0.0, 0.0, 0.0, 0.0);
    for (std::size_t j = 0; j < cells; ++j) {
      a.market.r[j] = 0.05 * u(rng);
      a.market.h[j] = 0.1 * u(rng);
      a.market.sigma[j] = 0.05 + 0.4 * u(rng);
      a.market.sigma0[j] = 0.3 * u(rng);
    }
    const auto p = single(a, 0.25 + 4 * u(rng), cells);
    if (!validate(p, Regime::Primary).ok()) continue;
    ++done;
    ok += certify(p, sup, secs);
    worst = std::max(worst, sup);
    slowest = std::max(slowest, secs);
  }
  o.require(ok == 100, fmt::format("{}/100 random configs, worst sup {:.2e}, slowest {:.3f}s", ok, worst, slowest));
  return o;
}

Outcome merton_limit() {
  Outcome o;
  auto a = worked_type();
  a.prefs.theta = 0.0;
  auto b = second_type();
  b.prefs.theta = 0.0;
  const auto base = solve_mfg(mixture({{0.5, a}, {0.5, b}}));
  double pi_err = 0;
  for (std::size_t j = 0; j < 100; ++j)
    pi_err = std::max(pi_err, std::abs(base.pi_star[0][j] - 0.05 / (2.0 * 0.05)));
  o.require(pi_err <= 1e-12, fmt::format("pi* vs h/(gamma S) {:.1e}", pi_err));

  double c_err = 0;
  for (auto [w, gamma, h] : {std::tuple{0.2, 5.0, 0.2}, {0.9, 1.5, 0.01}, {0.5, 3.0, 0.0}}) {
    auto other = b;
    other.prefs.gamma = gamma;
    other.market.h.assign(100, h);
    const auto eq = solve_mfg(mixture({{1 - w, a}, {w, other}}));
    for (std::size_t i = 0; i < 101; ++i) c_err = std::max(c_err, std::abs(eq.c_star[0][i] - base.c_star[0][i]));
  }
  o.require(c_err <= 1e-12, fmt::format("type-1 c* change {:.1e}", c_err));
  return o;
}

Outcome fixed_point() {
  Outcome o;
  auto cfg = config("two_type.json");
  for (auto& t : cfg.population.types) t.type.market.sigma0.assign(cfg.n_cells, 0.0);
  const auto det = fixed_point_residual(solve_mfg(cfg.population), cfg.sim);
  o.require(det.pass && det.statistic <= 1e-6, fmt::format("sigma0=0 residual {:.1e}", det.statistic));

  for (const char* name : {"single_type.json", "two_type.json"}) {
    const auto c = config(name);
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = fixed_point_residual(solve_mfg(c.population), c.sim);
    const double secs = seconds_since(t0);
    o.require(r.pass && c.sim.n_paths >= 100000 && secs < 30.0,
              fmt::format("{} max z {:.2f} ({} paths, {:.1f}s)", name, r.statistic, c.sim.n_paths, secs));
  }
  return o;
}

Outcome recursion() {
  Outcome o;
  for (const char* name : {"single_type.json", "two_type.json"}) {
    const auto c = config(name);
    const auto r = verify_recursion(solve_mfg(c.population), c.sim);
    o.require(r.pass, fmt::format("{} max |res|/SE {:.2f}", name, r.statistic));
  }
  auto a = worked_type();
  a.market.h.assign(100, 0.0);
  const auto zero = verify_recursion(solve_mfg(single(a)), paths(1000, 1));
  o.require(zero.pass && zero.statistic <= 1e-6, fmt::format("zero-vol |res| {:.1e}", zero.statistic));
  return o;
}

Outcome best_response() {
  Outcome o;
  const std::vector<double> eps{-0.1, -0.05, -0.01, 0.01, 0.05, 0.1};
  for (const char* name : {"single_type.json", "two_type.json"}) {
    const auto r = verify_best_response(solve_mfg(config(name).population), eps);
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& e : r.entries)
      if (e.label.find("ratio") != std::string::npos) {
        lo = std::min(lo, e.estimate);
        hi = std::max(hi, e.estimate);
      }
    o.require(r.pass, fmt::format("{} max gap {:.2e}, ratios in [{:.3f}, {:.3f}]", name, r.statistic, lo, hi));
  }
  return o;
}

Outcome nplayer_convergence() {
  Outcome o;
  const std::vector<std::size_t> ns{2, 4, 8, 16, 32};
  const auto grid = TimeGrid::uniform(1.0, 100);
  for (const auto& [label, type] : {std::pair{"worked", worked_type()}, {"second", second_type()}}) {
    const auto rep = mfg_limit_report(type, ns, grid);
    o.require(rep.pass(), fmt::format("{}: pi {} , c slope {:.3f} (gap N=2 {:.1e}, N=32 {:.1e})", label,
                                      rep.pi_coincident ? "coincident" : fmt::format("slope {:.3f}", rep.pi_slope),
                                      rep.c_slope, rep.rows.front().c_gap, rep.rows.back().c_gap));
  }
  return o;
}

Outcome power_reduction() {
  Outcome o;
  const auto c = config("power.json");
  const auto r = verify_power_reduction(solve_mfg(c.population));
  double agg = 0, cons = 0;
  for (const auto& e : r.entries) {
    if (e.label.find("consumption") != std::string::npos)
      cons = std::max(cons, e.estimate);
    else
      agg = std::max(agg, e.estimate);
  }
  o.require(r.pass, fmt::format("aggregator {:.1e}, consumption {:.1e}", agg, cons));
  return o;
}

Outcome derivatives() {
  Outcome o;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0;
  for (int s = 0; s < 100; ++s) {
    PreferenceParams p{0.01 + 0.3 * u(rng), 0.3 + 5 * u(rng), 1.05 + 4 * u(rng), 0.0, 1.0};
    if (std::abs(p.gamma - 1.0) < 0.05) p.gamma += 0.1;
    const double c = 0.05 + 5 * u(rng);
    const double v = (0.05 + 5 * u(rng)) / (1 - p.gamma);
    const auto d = aggregator_derivs(c, v, p);
    const double hc = 1e-5 * c, hv = 1e-5 * std::abs(v);
    const double fd1 = (aggregator(c + hc, v, p) - aggregator(c - hc, v, p)) / (2 * hc);
    const double fd2 = (aggregator(c, v + hv, p) - aggregator(c, v - hv, p)) / (2 * hv);
    worst = std::max({worst, std::abs(d.f1 - fd1) / std::max(1.0, std::abs(fd1)),
                      std::abs(d.f2 - fd2) / std::max(1.0, std::abs(fd2))});
  }
  o.require(worst <= 1e-6, fmt::format("worst relative error {:.1e} over 100 points", worst));
  return o;
}

std::string run_outputs(const RunConfig& c) {
  const auto eq = solve_mfg(c.population);
  return equilibrium_csv(eq) + nplayer_csv(solve_nplayer(c.nplayer_game())) +
         report_json(run_report(c, eq)).dump(2) + meta_json(c, "report").dump(2);
}

Outcome reproducibility() {
  Outcome o;
  ConfigOverrides ov;
  ov.paths = 20000;
  const auto c = load_config(std::string(EZMFG_CONFIG_DIR) + "/two_type.json", ov);
  std::string first, second, threaded;
  setenv("EZMFG_THREADS", "1", 1);
  first = run_outputs(c);
  second = run_outputs(c);
  setenv("EZMFG_THREADS", "8", 1);
  threaded = run_outputs(c);
  unsetenv("EZMFG_THREADS");
  o.require(first == second, "repeat run identical");
  o.require(first == threaded, "1 vs 8 workers identical");
  o.require(sha256_hex(first) == sha256_hex(threaded), fmt::format("sha256 {}", sha256_hex(first).substr(0, 16)));
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"Riccati certification", riccati_certification},
      {"Merton/decoupling limit", merton_limit},
      {"fixed-point verification", fixed_point},
      {"recursive-utility consistency", recursion},
      {"best-response optimality", best_response},
      {"N-player convergence", nplayer_convergence},
      {"power-utility reduction", power_reduction},
      {"derivative correctness", derivatives},
      {"reproducibility", reproducibility},
  };
  int failed = 0, n = 0;
  for (const auto& [name, fn] : criteria) {
    ++n;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    fmt::print("criterion {} {}: {} ({})\n", n, o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
