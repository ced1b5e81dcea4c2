#include "utility.hpp"

#include <cmath>
#include <string>

#include "ode.hpp"

namespace ezmfg {

namespace {

void check_domain(double c, double v, const PreferenceParams& p) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("aggregator: consumption must be positive");
  if (!std::isfinite(v)) throw DomainError("aggregator: utility must be finite");
  if ((1.0 - p.gamma) * v < 0.0) throw DomainError("aggregator: requires (1-gamma) v >= 0");
}

}  // namespace

Externality Externality::deterministic(std::function<double(double)> log_level,
                                       double terminal_log_level, std::size_t n_cells) {
  return Externality{std::move(log_level), terminal_log_level, std::vector<double>(n_cells, 0.0),
                     std::vector<double>(n_cells, 0.0)};
}

double aggregator(double c, double v, const PreferenceParams& p) {
  check_domain(c, v, p);
  const double tt = p.theta_tilde();
  const double eis = 1.0 - 1.0 / p.psi;
  const double base = (1.0 - p.gamma) * v;
  const double expo = 1.0 - 1.0 / tt;
  if (base == 0.0 && expo < 0.0) throw DomainError("aggregator: (1-gamma) v = 0 with negative exponent");
  return p.delta * std::pow(c, eis) / eis * std::pow(base, expo) - p.delta * tt * v;
}

AggregatorDerivatives aggregator_derivs(double c, double v, const PreferenceParams& p) {
  check_domain(c, v, p);
  const double tt = p.theta_tilde();
  const double eis = 1.0 - 1.0 / p.psi;
  const double base = (1.0 - p.gamma) * v;
  const double expo = 1.0 - 1.0 / tt;
  if (base == 0.0 && expo < 1.0 && expo != 0.0)
    throw DomainError("aggregator_derivs: (1-gamma) v = 0 makes f2 unbounded");
  AggregatorDerivatives d{};
  d.f1 = p.delta * std::pow(c, -1.0 / p.psi) * std::pow(base, expo);
  const double first = expo == 0.0 ? 0.0
                                   : p.delta * std::pow(c, eis) / eis * expo * (1.0 - p.gamma) *
                                         std::pow(base, -1.0 / tt);
  d.f2 = first - p.delta * tt;
  return d;
}

UtilityCurve evaluate_proportional(const AgentType& type, const ProportionalStrategy& strategy,
                                   const Externality& ext, const TimeGrid& grid,
                                   std::size_t substeps) {
  const auto& p = type.prefs;
  const auto& m = type.market;
  const std::size_t n_cells = grid.n_cells();
  if (strategy.pi.size() != n_cells) throw std::invalid_argument("strategy: one pi per cell expected");
  if (ext.common_exposure.size() != n_cells || ext.orthogonal_variance.size() != n_cells)
    throw std::invalid_argument("externality: one exposure per cell expected");

  const double g1 = 1.0 - p.gamma;
  const double tt = p.theta_tilde();
  const double eis = 1.0 - 1.0 / p.psi;
  const double phi_expo = 1.0 - 1.0 / tt;

  auto rhs = [&](double t, double phi, std::size_t j) {
    if (!(phi > 0.0)) throw DomainError("phi left the utility domain at t = " + std::to_string(t));
    const double pi = strategy.pi[j];
    const double c = strategy.consumption(t);
    if (!(c > 0.0)) throw DomainError("consumption rate must be positive at t = " + std::to_string(t));
    const double s = ext.common_exposure[j];
    const double var_rel = pi * pi * m.sigma[j] * m.sigma[j] +
                           (pi * m.sigma0[j] - p.theta * s) * (pi * m.sigma0[j] - p.theta * s) +
                           p.theta * p.theta * ext.orthogonal_variance[j];
    const double kappa =
        g1 * (m.r[j] + pi * m.h[j] - c - 0.5 * pi * pi * m.total_variance(j)) + 0.5 * g1 * g1 * var_rel;
    const double benchmarked = c * std::exp(-p.theta * ext.log_level(t));
    return -kappa * phi -
           p.delta * tt * (std::pow(benchmarked, eis) * std::pow(phi, phi_expo) - phi);
  };

  const double terminal = p.alpha * std::exp(-p.theta * g1 * ext.terminal_log_level);
  ode::GridFunction path;
  try {
    path = ode::rk4_backward(rhs, terminal, grid, substeps);
  } catch (const ode::BlowUp& e) {
    throw DomainError(std::string("utility evaluation diverged: ") + e.what());
  }
  for (double v : path.values)
    if (!(v > 0.0)) throw DomainError("phi left the utility domain");

  UtilityCurve curve{grid, std::move(path.values), 0.0};
  curve.V0 = curve.phi.front() * std::pow(type.x0, g1) / g1;
  return curve;
}

Externality equilibrium_externality(const MfgEquilibrium& eq) {
  const std::size_t n_cells = eq.grid().n_cells();
  Externality ext;
  ext.log_level = [&eq](double t) { return eq.running_log_benchmark(t); };
  ext.terminal_log_level = eq.log_wealth_mean(eq.grid().horizon());
  ext.common_exposure = eq.common_volatility;
  ext.orthogonal_variance.assign(n_cells, 0.0);
  return ext;
}

ProportionalStrategy equilibrium_strategy(const MfgEquilibrium& eq, std::size_t type) {
  ProportionalStrategy s;
  s.pi = eq.pi_star[type];
  s.consumption = [&eq, type](double t) { return eq.consumption(type, t); };
  s.consumption_integral = [&eq, type](double a, double b) {
    return eq.consumption_curves[type].integral(a, b);
  };
  return s;
}

double equilibrium_phi(const MfgEquilibrium& eq, std::size_t type, double t) {
  const auto& p = eq.population.type(type).prefs;
  return p.alpha * std::exp(eq.y_tilde_at(type, t) - p.theta * (1.0 - p.gamma) * eq.log_wealth_mean(t));
}

}  // namespace ezmfg
