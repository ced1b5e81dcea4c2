#pragma once

#include <cstddef>
#include <vector>

#include "model.hpp"
#include "riccati.hpp"

namespace ezmfg {

/// Coefficients of the per-type Riccati equation y' = y^2 + B y, y(T) = D.
/// A and B are indexed [type][cell].
struct RiccatiData {
  std::vector<std::vector<double>> A;
  std::vector<std::vector<double>> B;
  std::vector<double> D;
};

/// Closed-form mean-field equilibrium for deterministic coefficients.
///
/// Cell-valued quantities (pi_star, Z0, A, B) are indexed [type][cell]; path
/// quantities are indexed [type][grid point]. c_star follows the terminal
/// convention c*(T) = 1, while the Riccati solution itself ends at D.
struct MfgEquilibrium {
  Population population;

  std::vector<std::vector<double>> pi_star;
  std::vector<std::vector<double>> Z0;
  RiccatiData riccati;
  std::vector<RiccatiClosedForm> consumption_curves;

  std::vector<std::vector<double>> c_star;
  std::vector<std::vector<double>> Y_hat;
  std::vector<std::vector<double>> Y_tilde;         // by inverting the consumption map
  std::vector<std::vector<double>> Y_tilde_direct;  // by quadrature of its backward equation
  std::vector<double> nu_hat_deterministic;         // per grid point

  std::vector<double> common_volatility;  // E[pi* sigma0] per cell
  double coupling_mean = 0.0;             // E[theta (psi - 1)]
  std::vector<double> log_bequest_terms;  // m_k = -psi log delta + (psi/theta~) log alpha

  std::size_t n_types() const { return population.size(); }
  const TimeGrid& grid() const { return population.grid; }

  /// Equilibrium consumption rate on [0, T); at T returns the left limit D.
  double consumption(std::size_t type, double t) const {
    return consumption_curves[type].value(t);
  }
  double pi(std::size_t type, double t) const { return pi_star[type][grid().cell_of(t)]; }

  /// Y~_k(t) at an arbitrary time, by inverting the consumption map.
  double y_tilde_at(std::size_t type, double t) const;
  /// Deterministic part of E[log X*_t | F^0]: population mean of log x0 plus
  /// the integrated log-wealth drift.
  double log_wealth_mean(double t) const;
  /// nu^_t minus the common-noise wealth fluctuation int E[pi* sigma0] dW^0.
  /// At t = T only the wealth term remains.
  double nu_hat_deterministic_at(double t) const;
  /// Same as nu_hat_deterministic_at on [0, T), continued to T by its left limit.
  double running_log_benchmark(double t) const;
  /// int_0^t (r + pi* h - c* - pi*^2 (sigma^2 + sigma0^2) / 2) ds for one type.
  double log_wealth_drift_integral(std::size_t type, double t) const;
};

/// Z^0_k(t) for every type; the idiosyncratic Z component is identically 0.
std::vector<double> compute_Z0(const Population& population, double t);
std::vector<double> compute_Z0_cell(const Population& population, std::size_t cell);

/// Equilibrium investment rate per type. Evaluates the closed form and the
/// (h + sigma0 Z0) / (gamma (sigma^2 + sigma0^2)) form and cross-checks them.
std::vector<double> compute_pi_star(const Population& population, double t);
std::vector<double> compute_pi_star_cell(const Population& population, std::size_t cell);

RiccatiData compute_riccati_data(const Population& population);

/// Equilibrium consumption curve per type.
std::vector<RiccatiClosedForm> solve_consumption(const Population& population,
                                                 const RiccatiData& data);

/// Assembles the full equilibrium. The population must already be valid.
MfgEquilibrium solve_mfg(const Population& population);

/// Independent route for the time-additive power-utility case
/// (psi * gamma = 1 for every type): integrates the coupled system of
/// log-consumption equations written in terms of gamma alone by RK4, without
/// the decoupling into per-type Riccati equations. Returns c per type and grid
/// point with c(T) = 1.
std::vector<std::vector<double>> solve_power_consumption(const Population& population,
                                                         std::size_t substeps = 64);

}  // namespace ezmfg
