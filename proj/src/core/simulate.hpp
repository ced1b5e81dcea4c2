#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mfg_solver.hpp"
#include "utility.hpp"

namespace ezmfg {

struct SimConfig {
  std::size_t n_paths = 100000;
  std::uint64_t seed = 20240601;
  bool antithetic = false;
  double dt_report = 0.0;     // 0: report at every grid point
  std::size_t substeps = 1;   // simulation steps per grid cell
};

/// Throws std::invalid_argument if the config cannot be used on this grid.
void check_sim_config(const SimConfig& sim, const TimeGrid& grid);

/// Grid indices of the reporting times. dt_report must land on grid points.
std::vector<std::size_t> report_indices(const TimeGrid& grid, double dt_report);

/// Worker count for path simulation: EZMFG_THREADS if set, else the hardware
/// concurrency. Results never depend on it.
std::size_t simulation_workers();

/// Whether the common noise is one path shared by everybody (conditional
/// expectations given F^0) or drawn afresh for each simulated agent.
enum class CommonNoise { Shared, PerPath };

/// Deterministic per-step ingredients of the exact log-wealth sampler.
struct SimPlan {
  std::vector<double> times;           // grid refined by substeps
  std::vector<std::size_t> grid_index;  // simulation step index of each grid point
  std::vector<double> sqrt_dt;         // per step
  std::vector<double> common_exposure;  // E[pi* sigma0] per step
  // per type, per step
  std::vector<std::vector<double>> drift;       // int (r + pi h - c - pi^2 S / 2)
  std::vector<std::vector<double>> idio_vol;    // pi sigma
  std::vector<std::vector<double>> common_vol;  // pi sigma0
  std::vector<double> log_x0;

  std::size_t n_steps() const { return sqrt_dt.size(); }
};

SimPlan make_sim_plan(const MfgEquilibrium& eq, std::size_t substeps);

/// One common Brownian path W^0 at every simulation time.
std::vector<double> shared_common_noise(const SimPlan& plan, std::uint64_t seed);
/// L_t = int E[pi* sigma0] dW^0 along a W^0 path.
std::vector<double> common_level(const SimPlan& plan, std::span<const double> w0);

/// Maps one simulated path (log X and L at every simulation time) to a fixed
/// number of scalar functionals. Must be safe to call concurrently.
using PathFunctional = std::function<void(std::size_t type, std::span<const double> log_x,
                                          std::span<const double> common_level,
                                          std::span<double> out)>;

struct SampleStats {
  std::size_t n_samples = 0;  // antithetic pairs count as one sample
  std::vector<double> mean;
  std::vector<double> std_error;
};

/// Monte Carlo means of the functionals per type. Paths are processed in fixed
/// blocks and reduced in block order, so the result is a pure function of the
/// inputs and seed.
std::vector<SampleStats> sample_functionals(const SimPlan& plan, const SimConfig& sim,
                                            CommonNoise mode, std::span<const double> shared_common,
                                            std::size_t n_functionals,
                                            const PathFunctional& functional);

/// Simulated equilibrium log-wealth at the reporting times under one shared
/// common-noise path.
struct WealthPaths {
  std::vector<double> times;
  std::vector<double> common_level;                     // L at the reporting times
  std::vector<std::vector<std::vector<double>>> log_x;  // [type][path][time]
};

WealthPaths simulate_log_wealth(const MfgEquilibrium& eq, const SimConfig& sim);

/// One compared quantity inside a check.
struct CheckEntry {
  std::string label;
  double t = 0.0;
  double estimate = 0.0;
  double reference = 0.0;
  double std_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

struct CheckResult {
  std::string name;
  std::vector<CheckEntry> entries;
  double statistic = 0.0;  // worst standardized residual or worst absolute error
  bool pass = false;
  bool skipped = false;
  std::string detail;
};

struct PathSummary {
  std::size_t type = 0;
  double t = 0.0;
  double mean_log_x = 0.0;
  double var_log_x = 0.0;
};

struct SimulationReport {
  std::vector<CheckResult> checks;
  std::vector<PathSummary> paths;

  bool all_pass() const;
};

/// Compares the population mean of log c* + E[log X* | F^0] with nu^*
/// rebuilt from the quadrature Y~ at each reporting time (wealth term only at
/// T). Without common noise the conditional means are evaluated in closed form
/// and the tolerance is 1e-6; otherwise they are estimated on one shared
/// common path and each standardized residual must stay below 3.
CheckResult fixed_point_residual(const MfgEquilibrium& eq, const SimConfig& sim,
                                 std::vector<PathSummary>* summary = nullptr);

/// Utility gap V0(eps) - V0(0) of a single deviating agent of `type`, holding
/// the equilibrium externality fixed, for c -> c* (1 + eps) and pi -> pi* + eps.
/// Gaps must be <= 1e-10 and, where eps = +-0.05 and +-0.1 are both present,
/// gap(0.1) / gap(0.05) must lie in [3.5, 4.5].
CheckResult best_response_gap(const MfgEquilibrium& eq, std::size_t type,
                              const std::vector<double>& eps_list, std::size_t substeps = 20);

/// Same harness for any agent, candidate strategy and frozen externality.
CheckResult best_response_check(const AgentType& agent, const ProportionalStrategy& strategy,
                                const Externality& externality, const TimeGrid& grid,
                                const std::vector<double>& eps_list, std::size_t substeps = 20);

}  // namespace ezmfg
