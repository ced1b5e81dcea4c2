#include "mfg_solver.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ode.hpp"

namespace ezmfg {

namespace {

struct CellMarket {
  double r, h, sigma, sigma0, variance;
};

CellMarket market_at(const AgentType& a, std::size_t j) {
  const auto& m = a.market;
  return {m.r[j], m.h[j], m.sigma[j], m.sigma0[j], m.total_variance(j)};
}

// theta (1 - gamma) E[sigma0 h / (gamma S)] / (1 + E[theta (1-gamma) sigma0^2 / (gamma S)])
// without the leading own-type theta (1 - gamma): the common factor q with
// Z0_k = -theta_k (1 - gamma_k) q.
double common_investment_factor(const Population& population, std::size_t cell) {
  const double numer = population_mean_cell(
      population,
      [](const AgentType& a, std::size_t j) {
        const auto m = market_at(a, j);
        return m.sigma0 * m.h / (a.prefs.gamma * m.variance);
      },
      cell);
  const double denom = mean_field_denominator(population, cell);
  if (!(denom >= kSingularityThreshold))
    throw std::domain_error("singular equilibrium denominator at cell " + std::to_string(cell));
  return numer / denom;
}

std::size_t cell_of_grid_time(const Population& population, double t) {
  const std::size_t idx = population.grid.index_of(t);
  return std::min(idx, population.grid.n_cells() - 1);
}

}  // namespace

std::vector<double> compute_Z0_cell(const Population& population, std::size_t cell) {
  const double q = common_investment_factor(population, cell);
  std::vector<double> z0(population.size());
  for (std::size_t k = 0; k < population.size(); ++k) {
    const auto& p = population.type(k).prefs;
    z0[k] = -p.theta * (1.0 - p.gamma) * q;
  }
  return z0;
}

std::vector<double> compute_Z0(const Population& population, double t) {
  return compute_Z0_cell(population, cell_of_grid_time(population, t));
}

std::vector<double> compute_pi_star_cell(const Population& population, std::size_t cell) {
  const double q = common_investment_factor(population, cell);
  const auto z0 = compute_Z0_cell(population, cell);
  std::vector<double> pi(population.size());
  for (std::size_t k = 0; k < population.size(); ++k) {
    const auto& a = population.type(k);
    const auto m = market_at(a, cell);
    const double scale = a.prefs.gamma * m.variance;
    const double closed = m.h / scale - (m.sigma0 / scale) * a.prefs.theta * (1.0 - a.prefs.gamma) * q;
    const double via_z0 = (m.h + m.sigma0 * z0[k]) / scale;
    if (std::abs(closed - via_z0) > 1e-9 * (1.0 + std::abs(closed)))
      throw std::logic_error("investment closed forms disagree at cell " + std::to_string(cell));
    pi[k] = closed;
  }
  return pi;
}

std::vector<double> compute_pi_star(const Population& population, double t) {
  return compute_pi_star_cell(population, cell_of_grid_time(population, t));
}

RiccatiData compute_riccati_data(const Population& population) {
  const std::size_t n = population.size();
  const std::size_t m = population.grid.n_cells();
  RiccatiData data;
  data.A.assign(n, std::vector<double>(m));
  data.B.assign(n, std::vector<double>(m));
  data.D.assign(n, 0.0);

  const double coupling_mean = population_mean_cell(
      population, [](const AgentType& a, std::size_t) { return a.prefs.theta * (a.prefs.psi - 1.0); },
      0);
  auto coupling = [&](const PreferenceParams& p) {
    return p.theta * (p.psi - 1.0) / (coupling_mean + 1.0);
  };

  for (std::size_t j = 0; j < m; ++j) {
    const auto z0 = compute_Z0_cell(population, j);
    const auto pi = compute_pi_star_cell(population, j);
    double drift_mean = 0.0;  // E[r + pi h - pi^2 S / 2]
    for (std::size_t k = 0; k < n; ++k) {
      const auto c = market_at(population.type(k), j);
      drift_mean += population.weight(k) *
                    (c.r + pi[k] * c.h - 0.5 * pi[k] * pi[k] * c.variance);
    }
    double scaled_a_mean = 0.0;  // E[(psi / theta~) A]
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = population.type(k).prefs;
      const auto c = market_at(population.type(k), j);
      const double excess = c.h + c.sigma0 * z0[k];
      data.A[k][j] = 0.5 * z0[k] * z0[k] + (1.0 - p.gamma) * c.r +
                     (1.0 - p.gamma) / (2.0 * p.gamma) * excess * excess / c.variance -
                     p.delta * p.theta_tilde() - p.theta * (1.0 - p.gamma) * drift_mean;
      scaled_a_mean += population.weight(k) * p.psi_over_theta_tilde() * data.A[k][j];
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = population.type(k).prefs;
      data.B[k][j] = p.psi_over_theta_tilde() * data.A[k][j] - coupling(p) * scaled_a_mean;
    }
  }

  std::vector<double> bequest(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = population.type(k).prefs;
    bequest[k] = -p.psi * std::log(p.delta) + p.psi_over_theta_tilde() * std::log(p.alpha);
  }
  const double bequest_mean = weighted_mean(population, bequest);
  for (std::size_t k = 0; k < n; ++k) {
    data.D[k] = std::exp(coupling(population.type(k).prefs) * bequest_mean - bequest[k]);
  }
  return data;
}

std::vector<RiccatiClosedForm> solve_consumption(const Population& population,
                                                 const RiccatiData& data) {
  std::vector<RiccatiClosedForm> curves;
  curves.reserve(population.size());
  for (std::size_t k = 0; k < population.size(); ++k)
    curves.emplace_back(population.grid, data.B[k], data.D[k]);
  return curves;
}

double MfgEquilibrium::y_tilde_at(std::size_t type, double t) const {
  double mean_log_c = 0.0;
  for (std::size_t k = 0; k < n_types(); ++k)
    mean_log_c += population.weight(k) * std::log(consumption(k, t));
  const double mean_y_hat = -(1.0 + coupling_mean) * mean_log_c;
  const auto& p = population.type(type).prefs;
  const double a = p.theta * (p.psi - 1.0) / (1.0 + coupling_mean);
  const double y_hat = a * mean_y_hat - std::log(consumption(type, t));
  return (y_hat - log_bequest_terms[type]) / p.psi_over_theta_tilde();
}

double MfgEquilibrium::log_wealth_drift_integral(std::size_t type, double t) const {
  const auto& g = grid();
  const auto& a = population.type(type);
  double acc = 0.0;
  const std::size_t last = g.cell_of(t);
  for (std::size_t j = 0; j <= last; ++j) {
    const double hi = std::min(t, g[j + 1]);
    if (hi <= g[j]) break;
    const double p = pi_star[type][j];
    const double rate = a.market.r[j] + p * a.market.h[j] - 0.5 * p * p * a.market.total_variance(j);
    acc += rate * (hi - g[j]);
  }
  return acc - consumption_curves[type].integral(0.0, t);
}

double MfgEquilibrium::log_wealth_mean(double t) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < n_types(); ++k)
    acc += population.weight(k) * (std::log(population.type(k).x0) + log_wealth_drift_integral(k, t));
  return acc;
}

double MfgEquilibrium::running_log_benchmark(double t) const {
  double mean_log_c = 0.0;
  for (std::size_t k = 0; k < n_types(); ++k)
    mean_log_c += population.weight(k) * std::log(consumption(k, t));
  return mean_log_c + log_wealth_mean(t);
}

double MfgEquilibrium::nu_hat_deterministic_at(double t) const {
  return t < grid().horizon() ? running_log_benchmark(t) : log_wealth_mean(t);
}

MfgEquilibrium solve_mfg(const Population& population) {
  MfgEquilibrium eq;
  eq.population = population;
  const std::size_t n = population.size();
  const auto& grid = population.grid;
  const std::size_t m = grid.n_cells();

  eq.pi_star.assign(n, std::vector<double>(m));
  eq.Z0.assign(n, std::vector<double>(m));
  eq.common_volatility.assign(m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    const auto z0 = compute_Z0_cell(population, j);
    const auto pi = compute_pi_star_cell(population, j);
    for (std::size_t k = 0; k < n; ++k) {
      eq.Z0[k][j] = z0[k];
      eq.pi_star[k][j] = pi[k];
      eq.common_volatility[j] += population.weight(k) * pi[k] * population.type(k).market.sigma0[j];
    }
  }

  eq.riccati = compute_riccati_data(population);
  eq.consumption_curves = solve_consumption(population, eq.riccati);

  eq.coupling_mean = 0.0;
  eq.log_bequest_terms.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = population.type(k).prefs;
    eq.coupling_mean += population.weight(k) * p.theta * (p.psi - 1.0);
    eq.log_bequest_terms[k] = -p.psi * std::log(p.delta) + p.psi_over_theta_tilde() * std::log(p.alpha);
  }

  const std::size_t np = grid.n_points();
  eq.c_star.assign(n, std::vector<double>(np));
  eq.Y_hat.assign(n, std::vector<double>(np));
  eq.Y_tilde.assign(n, std::vector<double>(np));
  for (std::size_t i = 0; i < np; ++i) {
    const double t = grid[i];
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = population.type(k).prefs;
      eq.c_star[k][i] = (i + 1 == np) ? 1.0 : eq.consumption(k, t);
      eq.Y_tilde[k][i] = eq.y_tilde_at(k, t);
      eq.Y_hat[k][i] = eq.log_bequest_terms[k] + p.psi_over_theta_tilde() * eq.Y_tilde[k][i];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(eq.Y_tilde[k].back()) > 1e-9)
      throw std::logic_error("Y~(T) = " + std::to_string(eq.Y_tilde[k].back()) +
                             " for type " + std::to_string(k) + "; expected 0");
  }

  // Y~_k(t) = int_t^T [theta (1-gamma) E[c*] + (1-gamma)/(psi-1) c*_k + A_k] ds
  eq.Y_tilde_direct.assign(n, std::vector<double>(np, 0.0));
  for (std::size_t j = m; j-- > 0;) {
    std::vector<double> cell_c(n);
    for (std::size_t k = 0; k < n; ++k) {
      cell_c[k] = ode::integrate_richardson(
                      [&eq, k](double t, std::size_t) { return eq.consumption(k, t); }, grid,
                      grid[j], grid[j + 1])
                      .value;
    }
    const double mean_c = weighted_mean(population, cell_c);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = population.type(k).prefs;
      const double cell = p.theta * (1.0 - p.gamma) * mean_c +
                          (1.0 - p.gamma) / (p.psi - 1.0) * cell_c[k] +
                          eq.riccati.A[k][j] * grid.cell_width(j);
      eq.Y_tilde_direct[k][j] = eq.Y_tilde_direct[k][j + 1] + cell;
    }
  }

  eq.nu_hat_deterministic.resize(np);
  for (std::size_t i = 0; i < np; ++i) eq.nu_hat_deterministic[i] = eq.nu_hat_deterministic_at(grid[i]);
  return eq;
}

std::vector<std::vector<double>> solve_power_consumption(const Population& population,
                                                         std::size_t substeps) {
  const std::size_t n = population.size();
  const std::size_t m = population.grid.n_cells();
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = population.type(k).prefs;
    if (std::abs(p.psi * p.gamma - 1.0) > 1e-12)
      throw std::invalid_argument("power-utility path requires psi * gamma = 1 (type " +
                                  std::to_string(k) + ")");
  }

  // Time-additive power utility: EIS 1/gamma, discounting at delta.
  std::vector<double> eis_coupling(n), bequest(n);
  double eis_coupling_mean = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& p = population.type(k).prefs;
    eis_coupling[k] = p.theta * (1.0 - p.gamma) / p.gamma;
    eis_coupling_mean += population.weight(k) * eis_coupling[k];
    bequest[k] = (std::log(p.alpha) - std::log(p.delta)) / p.gamma;
  }

  // Per-cell drift term of each type's log-utility equation, divided by gamma.
  std::vector<std::vector<double>> drift(n, std::vector<double>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const auto pi = compute_pi_star_cell(population, j);
    const auto z0 = compute_Z0_cell(population, j);
    double wealth_drift_mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& mk = population.type(k).market;
      wealth_drift_mean += population.weight(k) *
                           (mk.r[j] + pi[k] * mk.h[j] - 0.5 * pi[k] * pi[k] * mk.total_variance(j));
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto& p = population.type(k).prefs;
      const auto& mk = population.type(k).market;
      const double g = p.gamma;
      const double excess = mk.h[j] + mk.sigma0[j] * z0[k];
      const double a_pow = 0.5 * z0[k] * z0[k] + (1.0 - g) * mk.r[j] +
                           (1.0 - g) / (2.0 * g) * excess * excess / mk.total_variance(j) -
                           p.delta - p.theta * (1.0 - g) * wealth_drift_mean;
      drift[k][j] = a_pow / g;
    }
  }

  auto consumption_of = [&](std::span<const double> y_hat, std::span<double> c) {
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean += population.weight(k) * y_hat[k];
    for (std::size_t k = 0; k < n; ++k)
      c[k] = std::exp(eis_coupling[k] / (1.0 + eis_coupling_mean) * mean - y_hat[k]);
  };

  std::vector<double> c_buf(n);
  const auto path = ode::rk4_backward_system(
      [&](double, std::span<const double> y, std::size_t cell, std::span<double> dy) {
        consumption_of(y, c_buf);
        double mean_c = 0.0;
        for (std::size_t k = 0; k < n; ++k) mean_c += population.weight(k) * c_buf[k];
        for (std::size_t k = 0; k < n; ++k)
          dy[k] = -eis_coupling[k] * mean_c - c_buf[k] - drift[k][cell];
      },
      bequest, population.grid, substeps);

  std::vector<std::vector<double>> out(n, std::vector<double>(population.grid.n_points()));
  for (std::size_t i = 0; i < path.size(); ++i) {
    consumption_of(path[i], c_buf);
    for (std::size_t k = 0; k < n; ++k) out[k][i] = c_buf[k];
  }
  for (std::size_t k = 0; k < n; ++k) out[k].back() = 1.0;
  return out;
}

}  // namespace ezmfg
