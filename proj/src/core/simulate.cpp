#include "simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>

#include <fmt/format.h>

#include "utility.hpp"

namespace ezmfg {

namespace {

constexpr std::size_t kBlockPaths = 512;
constexpr std::uint32_t kIdioTag = 0x1d10u;
constexpr std::uint32_t kCommonTag = 0xc0u;

std::mt19937_64 make_stream(std::uint64_t seed, std::uint32_t tag, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag,
                    static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

// Runs fn(unit) for unit in [0, n_units) on the simulation workers.
void parallel_units(std::size_t n_units, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min(simulation_workers(), n_units);
  if (workers <= 1) {
    for (std::size_t u = 0; u < n_units; ++u) fn(u);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t u = next++; u < n_units && !failed; u = next++) {
        try {
          fn(u);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Welford {
  std::size_t n = 0;
  std::vector<double> mean, m2;

  explicit Welford(std::size_t q) : mean(q, 0.0), m2(q, 0.0) {}

  void add(std::span<const double> x) {
    ++n;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - mean[i];
      mean[i] += d / static_cast<double>(n);
      m2[i] += d * (x[i] - mean[i]);
    }
  }

  void merge(const Welford& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n), nb = static_cast<double>(o.n);
    const double nt = na + nb;
    for (std::size_t i = 0; i < mean.size(); ++i) {
      const double d = o.mean[i] - mean[i];
      mean[i] += d * nb / nt;
      m2[i] += o.m2[i] + d * d * na * nb / nt;
    }
    n += o.n;
  }
};

// Simulates the paths of one block of one type and hands each to visit(path
// index, log_x, common_level). Antithetic partners share a stream with all
// independent normals negated; a shared common path is never negated.
// shared_common is W^0 at the simulation times.
void simulate_block(const SimPlan& plan, const SimConfig& sim, CommonNoise mode,
                    std::span<const double> shared_common, std::size_t type, std::size_t first_path,
                    std::size_t last_path,
                    const std::function<void(std::size_t, std::span<const double>,
                                             std::span<const double>)>& visit) {
  const std::size_t steps = plan.n_steps();
  const bool per_path = mode == CommonNoise::PerPath;
  const std::size_t width = sim.antithetic ? 2 : 1;
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> z_idio(steps), z_common(per_path ? steps : 0);
  std::vector<double> log_x(steps + 1), level(steps + 1);
  const auto& drift = plan.drift[type];
  const auto& idio = plan.idio_vol[type];
  const auto& common = plan.common_vol[type];

  for (std::size_t p = first_path; p < last_path; p += width) {
    auto rng = make_stream(sim.seed, kIdioTag, type, p / width);
    for (std::size_t s = 0; s < steps; ++s) {
      z_idio[s] = normal(rng);
      if (per_path) z_common[s] = normal(rng);
    }
    for (std::size_t a = 0; a < width; ++a) {
      const double sign = a == 0 ? 1.0 : -1.0;
      log_x[0] = plan.log_x0[type];
      level[0] = 0.0;
      for (std::size_t s = 0; s < steps; ++s) {
        const double dw0 = per_path ? sign * z_common[s] * plan.sqrt_dt[s]
                                    : shared_common[s + 1] - shared_common[s];
        level[s + 1] = level[s] + plan.common_exposure[s] * dw0;
        log_x[s + 1] = log_x[s] + drift[s] + idio[s] * plan.sqrt_dt[s] * sign * z_idio[s] + common[s] * dw0;
      }
      visit(p + a, log_x, level);
    }
  }
}

}  // namespace

std::size_t simulation_workers() {
  if (const char* env = std::getenv("EZMFG_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void check_sim_config(const SimConfig& sim, const TimeGrid& grid) {
  if (sim.n_paths < 1) throw std::invalid_argument("sim.n_paths must be at least 1");
  if (sim.antithetic && sim.n_paths % 2 != 0)
    throw std::invalid_argument("sim.n_paths must be even with antithetic sampling");
  if (sim.substeps < 1) throw std::invalid_argument("sim.substeps must be at least 1");
  if (!(sim.dt_report >= 0.0) || !std::isfinite(sim.dt_report))
    throw std::invalid_argument("sim.dt_report must be finite and non-negative");
  report_indices(grid, sim.dt_report);
}

std::vector<std::size_t> report_indices(const TimeGrid& grid, double dt_report) {
  std::vector<std::size_t> out;
  if (dt_report == 0.0) {
    for (std::size_t i = 0; i < grid.n_points(); ++i) out.push_back(i);
    return out;
  }
  const double T = grid.horizon();
  const double ratio = T / dt_report;
  const auto n = static_cast<std::size_t>(std::llround(ratio));
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("sim.dt_report must divide the horizon");
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = i == n ? T : static_cast<double>(i) * dt_report;
    if (!grid.on_grid(t))
      throw std::invalid_argument(fmt::format("sim.dt_report: reporting time {} is not a grid point", t));
    out.push_back(grid.index_of(t));
  }
  return out;
}

SimPlan make_sim_plan(const MfgEquilibrium& eq, std::size_t substeps) {
  if (substeps < 1) throw std::invalid_argument("substeps must be at least 1");
  const auto& grid = eq.grid();
  const std::size_t n = eq.n_types();
  const std::size_t m = grid.n_cells();
  SimPlan plan;
  plan.drift.assign(n, {});
  plan.idio_vol.assign(n, {});
  plan.common_vol.assign(n, {});
  plan.times.push_back(0.0);
  plan.grid_index.push_back(0);
  for (std::size_t j = 0; j < m; ++j) {
    const double a = grid[j], w = grid.cell_width(j);
    for (std::size_t s = 0; s < substeps; ++s) {
      const double lo = plan.times.back();
      const double hi = s + 1 == substeps ? grid[j + 1] : a + w * static_cast<double>(s + 1) / substeps;
      plan.times.push_back(hi);
      plan.sqrt_dt.push_back(std::sqrt(hi - lo));
      plan.common_exposure.push_back(eq.common_volatility[j]);
      for (std::size_t k = 0; k < n; ++k) {
        const auto& mk = eq.population.type(k).market;
        const double pi = eq.pi_star[k][j];
        const double rate = mk.r[j] + pi * mk.h[j] - 0.5 * pi * pi * mk.total_variance(j);
        plan.drift[k].push_back(rate * (hi - lo) - eq.consumption_curves[k].integral(lo, hi));
        plan.idio_vol[k].push_back(pi * mk.sigma[j]);
        plan.common_vol[k].push_back(pi * mk.sigma0[j]);
      }
    }
    plan.grid_index.push_back(plan.times.size() - 1);
  }
  for (std::size_t k = 0; k < n; ++k) plan.log_x0.push_back(std::log(eq.population.type(k).x0));
  return plan;
}

std::vector<double> shared_common_noise(const SimPlan& plan, std::uint64_t seed) {
  auto rng = make_stream(seed, kCommonTag, 0, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> w(plan.n_steps() + 1, 0.0);
  for (std::size_t s = 0; s < plan.n_steps(); ++s) w[s + 1] = w[s] + plan.sqrt_dt[s] * normal(rng);
  return w;
}

std::vector<double> common_level(const SimPlan& plan, std::span<const double> w0) {
  std::vector<double> level(w0.size(), 0.0);
  for (std::size_t s = 0; s + 1 < w0.size(); ++s)
    level[s + 1] = level[s] + plan.common_exposure[s] * (w0[s + 1] - w0[s]);
  return level;
}

std::vector<SampleStats> sample_functionals(const SimPlan& plan, const SimConfig& sim,
                                            CommonNoise mode, std::span<const double> shared_common,
                                            std::size_t q, const PathFunctional& functional) {
  if (sim.n_paths < 1) throw std::invalid_argument("sim.n_paths must be at least 1");
  if (sim.antithetic && sim.n_paths % 2 != 0)
    throw std::invalid_argument("sim.n_paths must be even with antithetic sampling");
  if (mode == CommonNoise::Shared && shared_common.size() != plan.n_steps() + 1)
    throw std::invalid_argument("shared common path does not match the simulation plan");

  const std::size_t n_types = plan.drift.size();
  const std::size_t n_blocks = (sim.n_paths + kBlockPaths - 1) / kBlockPaths;
  std::vector<Welford> partial(n_types * n_blocks, Welford(q));

  parallel_units(n_types * n_blocks, [&](std::size_t unit) {
    const std::size_t type = unit / n_blocks, block = unit % n_blocks;
    const std::size_t first = block * kBlockPaths;
    const std::size_t last = std::min(sim.n_paths, first + kBlockPaths);
    Welford& acc = partial[unit];
    std::vector<double> out(q), pair(q);
    bool pending = false;
    simulate_block(plan, sim, mode, shared_common, type, first, last,
                   [&](std::size_t, std::span<const double> log_x, std::span<const double> level) {
                     std::fill(out.begin(), out.end(), 0.0);
                     functional(type, log_x, level, out);
                     if (!sim.antithetic) {
                       acc.add(out);
                     } else if (!pending) {
                       pair = out;
                       pending = true;
                     } else {
                       for (std::size_t i = 0; i < q; ++i) pair[i] = 0.5 * (pair[i] + out[i]);
                       acc.add(pair);
                       pending = false;
                     }
                   });
  });

  std::vector<SampleStats> stats(n_types);
  for (std::size_t k = 0; k < n_types; ++k) {
    Welford total(q);
    for (std::size_t b = 0; b < n_blocks; ++b) total.merge(partial[k * n_blocks + b]);
    auto& s = stats[k];
    s.n_samples = total.n;
    s.mean = total.mean;
    s.std_error.assign(q, 0.0);
    if (total.n > 1) {
      const double nn = static_cast<double>(total.n);
      for (std::size_t i = 0; i < q; ++i) s.std_error[i] = std::sqrt(std::max(0.0, total.m2[i]) / (nn - 1.0) / nn);
    }
  }
  return stats;
}

WealthPaths simulate_log_wealth(const MfgEquilibrium& eq, const SimConfig& sim) {
  check_sim_config(sim, eq.grid());
  const auto plan = make_sim_plan(eq, sim.substeps);
  const auto w0 = shared_common_noise(plan, sim.seed);
  const auto common = common_level(plan, w0);
  const auto reports = report_indices(eq.grid(), sim.dt_report);

  WealthPaths out;
  for (std::size_t i : reports) {
    out.times.push_back(eq.grid()[i]);
    out.common_level.push_back(common[plan.grid_index[i]]);
  }
  const std::size_t n_types = eq.n_types();
  out.log_x.assign(n_types, std::vector<std::vector<double>>(sim.n_paths));
  const std::size_t n_blocks = (sim.n_paths + kBlockPaths - 1) / kBlockPaths;
  parallel_units(n_types * n_blocks, [&](std::size_t unit) {
    const std::size_t type = unit / n_blocks, block = unit % n_blocks;
    const std::size_t first = block * kBlockPaths;
    const std::size_t last = std::min(sim.n_paths, first + kBlockPaths);
    simulate_block(plan, sim, CommonNoise::Shared, w0, type, first, last,
                   [&](std::size_t path, std::span<const double> log_x, std::span<const double>) {
                     auto& row = out.log_x[type][path];
                     row.reserve(reports.size());
                     for (std::size_t i : reports) row.push_back(log_x[plan.grid_index[i]]);
                   });
  });
  return out;
}

bool SimulationReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

CheckResult fixed_point_residual(const MfgEquilibrium& eq, const SimConfig& sim,
                                 std::vector<PathSummary>* summary) {
  check_sim_config(sim, eq.grid());
  const auto& grid = eq.grid();
  const auto& pop = eq.population;
  const std::size_t n = eq.n_types();
  const std::size_t last = grid.n_points() - 1;
  const auto reports = report_indices(grid, sim.dt_report);

  bool common_noise = false;
  for (std::size_t k = 0; k < n; ++k)
    for (double s0 : pop.type(k).market.sigma0) common_noise = common_noise || s0 != 0.0;

  // nu^* without the common-noise term, rebuilt from the quadrature Y~:
  // E[log c*] = -E[Y^] / (1 + E[theta (psi - 1)]).
  auto nu_reference = [&](std::size_t i) {
    double value = eq.log_wealth_mean(grid[i]);
    if (i < last) {
      double mean_y_hat = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        const auto& p = pop.type(k).prefs;
        mean_y_hat += pop.weight(k) *
                      (eq.log_bequest_terms[k] + p.psi_over_theta_tilde() * eq.Y_tilde_direct[k][i]);
      }
      value += -mean_y_hat / (1.0 + eq.coupling_mean);
    }
    return value;
  };
  auto mean_log_c = [&](std::size_t i) {
    double acc = 0.0;
    if (i < last)
      for (std::size_t k = 0; k < n; ++k) acc += pop.weight(k) * std::log(eq.consumption(k, grid[i]));
    return acc;
  };
  auto det_log_x = [&](std::size_t k, std::size_t i) {
    return std::log(pop.type(k).x0) + eq.log_wealth_drift_integral(k, grid[i]);
  };

  CheckResult res;
  res.name = "fixed-point";
  res.pass = true;

  if (!common_noise) {
    res.detail = "deterministic conditional means (no common noise)";
    for (std::size_t i : reports) {
      double est = mean_log_c(i);
      for (std::size_t k = 0; k < n; ++k) est += pop.weight(k) * det_log_x(k, i);
      CheckEntry e{"nu", grid[i], est, nu_reference(i), 0.0, 1e-6, false, ""};
      e.pass = std::abs(e.estimate - e.reference) <= e.tolerance;
      res.statistic = std::max(res.statistic, std::abs(e.estimate - e.reference));
      res.pass = res.pass && e.pass;
      res.entries.push_back(e);
    }
    return res;
  }

  res.detail = fmt::format("Monte Carlo on one shared common path, {} paths per type", sim.n_paths);
  const auto plan = make_sim_plan(eq, sim.substeps);
  const auto w0 = shared_common_noise(plan, sim.seed);
  const auto common = common_level(plan, w0);
  // Functionals are log X at the reporting times minus its unconditional
  // deterministic part, which keeps the variance accumulation well scaled.
  std::vector<std::vector<double>> shift(n, std::vector<double>(reports.size()));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t r = 0; r < reports.size(); ++r) shift[k][r] = det_log_x(k, reports[r]);
  const auto stats = sample_functionals(
      plan, sim, CommonNoise::Shared, w0, reports.size(),
      [&](std::size_t type, std::span<const double> log_x, std::span<const double>, std::span<double> out) {
        for (std::size_t r = 0; r < reports.size(); ++r)
          out[r] = log_x[plan.grid_index[reports[r]]] - shift[type][r];
      });

  for (std::size_t r = 0; r < reports.size(); ++r) {
    const std::size_t i = reports[r];
    const double level = common[plan.grid_index[i]];
    double est = mean_log_c(i), var = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      est += pop.weight(k) * (shift[k][r] + stats[k].mean[r]);
      var += pop.weight(k) * pop.weight(k) * stats[k].std_error[r] * stats[k].std_error[r];
    }
    CheckEntry e{"nu", grid[i], est, nu_reference(i) + level, std::sqrt(var), 3.0, false, ""};
    const double err = std::abs(e.estimate - e.reference);
    if (e.std_error > 0.0) {
      const double z = err / e.std_error;
      e.pass = z <= 3.0;
      res.statistic = std::max(res.statistic, z);
    } else {
      e.tolerance = 1e-6;
      e.note = "zero sample variance; absolute tolerance";
      e.pass = err <= 1e-6;
    }
    res.pass = res.pass && e.pass;
    res.entries.push_back(e);
  }

  if (summary) {
    const std::size_t r = reports.size() - 1;
    for (std::size_t k = 0; k < n; ++k) {
      const double se = stats[k].std_error[r];
      const double ns = static_cast<double>(stats[k].n_samples);
      summary->push_back({k, grid.horizon(), shift[k][r] + stats[k].mean[r], se * se * ns});
    }
  }
  return res;
}

CheckResult best_response_gap(const MfgEquilibrium& eq, std::size_t type,
                              const std::vector<double>& eps_list, std::size_t substeps) {
  if (type >= eq.n_types()) throw std::out_of_range("best_response_gap: type index out of range");
  auto res = best_response_check(eq.population.type(type), equilibrium_strategy(eq, type),
                                 equilibrium_externality(eq), eq.grid(), eps_list, substeps);
  res.detail = fmt::format("type {}, {}", type, res.detail);
  return res;
}

CheckResult best_response_check(const AgentType& agent, const ProportionalStrategy& base_strategy,
                                const Externality& ext, const TimeGrid& grid,
                                const std::vector<double>& eps_list, std::size_t substeps) {
  const double v_base = evaluate_proportional(agent, base_strategy, ext, grid, substeps).V0;

  CheckResult res;
  res.name = "best-response";
  res.pass = true;
  res.statistic = -std::numeric_limits<double>::infinity();
  res.detail = fmt::format("V0 = {:.17g}", v_base);

  struct Gap {
    double eps;
    double gap;
    bool ok;
  };
  for (const char* kind : {"c-scale", "pi-shift"}) {
    const bool is_c = std::string(kind) == "c-scale";
    std::vector<Gap> gaps;
    for (double eps : eps_list) {
      ProportionalStrategy s = base_strategy;
      if (is_c) {
        s.consumption = [base = base_strategy.consumption, eps](double t) { return base(t) * (1.0 + eps); };
        s.consumption_integral = nullptr;
      } else {
        for (double& p : s.pi) p += eps;
      }
      CheckEntry e{fmt::format("{} eps={}", kind, eps), 0.0, 0.0, 0.0, 0.0, 1e-10, false, ""};
      try {
        e.estimate = evaluate_proportional(agent, s, ext, grid, substeps).V0 - v_base;
        e.pass = e.estimate <= e.tolerance;
        gaps.push_back({eps, e.estimate, true});
      } catch (const DomainError& err) {
        e.estimate = std::numeric_limits<double>::quiet_NaN();
        e.note = err.what();
        gaps.push_back({eps, e.estimate, false});
      }
      if (!std::isnan(e.estimate)) res.statistic = std::max(res.statistic, e.estimate);
      res.pass = res.pass && e.pass;
      res.entries.push_back(e);
    }
    auto find = [&](double eps) -> const Gap* {
      for (const auto& g : gaps)
        if (g.eps == eps) return &g;
      return nullptr;
    };
    for (double sign : {1.0, -1.0}) {
      const Gap* big = find(0.1 * sign);
      const Gap* small = find(0.05 * sign);
      if (!big || !small) continue;
      CheckEntry e{fmt::format("{} ratio eps={}", kind, 0.1 * sign), 0.0, 0.0, 4.0, 0.0, 0.5, false, ""};
      if (big->ok && small->ok && small->gap != 0.0) {
        e.estimate = big->gap / small->gap;
        e.pass = e.estimate >= 3.5 && e.estimate <= 4.5;
      } else {
        e.estimate = std::numeric_limits<double>::quiet_NaN();
        e.note = "gap unavailable or zero";
      }
      res.pass = res.pass && e.pass;
      res.entries.push_back(e);
    }
  }
  return res;
}

}  // namespace ezmfg
