#include <cmath>
#include <stdexcept>

#include "simulate.hpp"
#include "utility.hpp"

namespace ezmfg {

// Simpson's rule per grid cell on the simulation times, so substeps is made
// even. Each path draws its own common noise, since V0 averages over W^0 too.
RecursionResidual mc_recursion_residual(const MfgEquilibrium& eq, std::size_t type,
                                        const SimConfig& sim) {
  if (type >= eq.n_types()) throw std::out_of_range("mc_recursion_residual: type index out of range");
  check_sim_config(sim, eq.grid());
  const auto& agent = eq.population.type(type);
  const auto& p = agent.prefs;
  const double g1 = 1.0 - p.gamma;
  const std::size_t substeps = sim.substeps + sim.substeps % 2;
  const auto plan = make_sim_plan(eq, substeps);
  const std::size_t n_times = plan.times.size();
  const double T = eq.grid().horizon();

  // Deterministic ingredients at every simulation time.
  std::vector<double> c(n_times), k(n_times), phi(n_times), weight(n_times, 0.0);
  for (std::size_t s = 0; s < n_times; ++s) {
    const double t = plan.times[s];
    c[s] = eq.consumption(type, t);
    k[s] = eq.running_log_benchmark(t);
    phi[s] = equilibrium_phi(eq, type, t);
  }
  for (std::size_t s = 0; s + 1 < n_times; s += 2) {
    const double h = plan.times[s + 2] - plan.times[s];
    weight[s] += h / 6.0;
    weight[s + 1] += 4.0 * h / 6.0;
    weight[s + 2] += h / 6.0;
  }
  const double k_T = eq.log_wealth_mean(T);

  bool deterministic = true;
  for (std::size_t s = 0; s + 1 < n_times; ++s) {
    deterministic = deterministic && plan.common_exposure[s] == 0.0;
    for (std::size_t j = 0; j < eq.n_types(); ++j)
      deterministic = deterministic && plan.idio_vol[j][s] == 0.0 && plan.common_vol[j][s] == 0.0;
  }

  const auto stats = sample_functionals(
      plan, sim, CommonNoise::PerPath, {}, 1,
      [&](std::size_t j, std::span<const double> log_x, std::span<const double> level, std::span<double> out) {
        if (j != type) return;
        double acc = 0.0;
        for (std::size_t s = 0; s < n_times; ++s) {
          if (weight[s] == 0.0) continue;
          const double benchmarked = c[s] * std::exp(log_x[s] - p.theta * (k[s] + level[s]));
          const double v = phi[s] * std::exp(g1 * (log_x[s] - p.theta * level[s])) / g1;
          acc += weight[s] * aggregator(benchmarked, v, p);
        }
        const double terminal = std::exp(g1 * (log_x.back() - p.theta * (k_T + level.back()))) / g1;
        out[0] = acc + p.alpha * terminal;
      });

  RecursionResidual r;
  r.estimate = stats[type].mean[0];
  r.std_error = deterministic ? 0.0 : stats[type].std_error[0];
  r.utility = phi[0] * std::pow(agent.x0, g1) / g1;
  r.residual = r.estimate - r.utility;
  return r;
}

}  // namespace ezmfg
