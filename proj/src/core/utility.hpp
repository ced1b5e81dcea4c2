#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "grid.hpp"
#include "mfg_solver.hpp"
#include "model.hpp"

namespace ezmfg {

struct SimConfig;

/// Raised when an argument leaves the domain of the Epstein-Zin aggregator or
/// a utility evaluation leaves phi > 0.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Investment and consumption as fractions of current wealth.
struct ProportionalStrategy {
  std::vector<double> pi;                                 // per cell
  std::function<double(double t)> consumption;            // on [0, T); left limit at T
  std::function<double(double a, double b)> consumption_integral;  // optional exact int_a^b c
};

/// The log benchmark nu^_t seen by one agent, split as k(t) + L_t where k is
/// deterministic and L_0 = 0 is a driftless Gaussian martingale with
/// dL = s dW^0 + (noise independent of the agent's own and the common noise).
struct Externality {
  std::function<double(double t)> log_level;  // k(t) on [0, T)
  double terminal_log_level = 0.0;            // k(T)
  std::vector<double> common_exposure;        // s per cell
  std::vector<double> orthogonal_variance;    // variance rate of the remaining part, per cell

  static Externality deterministic(std::function<double(double)> log_level,
                                   double terminal_log_level, std::size_t n_cells);
};

/// V_t = phi(t) X~_t^{1-gamma} / (1 - gamma) with X~ = X e^{-theta L}.
struct UtilityCurve {
  TimeGrid grid;
  std::vector<double> phi;
  double V0 = 0.0;
};

/// f(c, v) = delta c^{1-1/psi} / (1-1/psi) ((1-gamma) v)^{1-1/theta~} - delta theta~ v.
double aggregator(double c, double v, const PreferenceParams& prefs);

struct AggregatorDerivatives {
  double f1;  // d/dc
  double f2;  // d/dv
};

AggregatorDerivatives aggregator_derivs(double c, double v, const PreferenceParams& prefs);

/// Utility of a deterministic proportional strategy against a fixed
/// externality, from the backward equation for phi:
///
///   phi' = -kappa phi - delta theta~ [ (c e^{-theta k})^{1-1/psi} phi^{1-1/theta~} - phi ],
///   kappa = (1-gamma)(r + pi h - c - pi^2 (sigma^2+sigma0^2)/2)
///         + (1-gamma)^2/2 (pi^2 sigma^2 + (pi sigma0 - theta s)^2 + theta^2 v_orth),
///   phi(T) = alpha e^{-theta (1-gamma) k(T)}.
///
/// Throws DomainError if phi leaves (0, inf).
UtilityCurve evaluate_proportional(const AgentType& type, const ProportionalStrategy& strategy,
                                   const Externality& externality, const TimeGrid& grid,
                                   std::size_t substeps = 10);

/// The mean-field benchmark as seen by every type in equilibrium.
Externality equilibrium_externality(const MfgEquilibrium& eq);

ProportionalStrategy equilibrium_strategy(const MfgEquilibrium& eq, std::size_t type);

/// phi implied by the equilibrium: alpha exp(Y~_t - theta (1-gamma) m(t)),
/// with m the deterministic part of E[log X*_t | F^0].
double equilibrium_phi(const MfgEquilibrium& eq, std::size_t type, double t);

struct RecursionResidual {
  double estimate = 0.0;   // MC mean of int f ds + alpha U(X_T nu_T^{-theta})
  double utility = 0.0;    // V0 = alpha x0^{1-gamma} e^{Y_0} / (1-gamma)
  double residual = 0.0;   // estimate - utility
  double std_error = 0.0;
};

/// Monte Carlo check of the utility recursion along simulated equilibrium
/// paths, with V*_s = alpha X_s^{1-gamma} e^{Y_s} / (1-gamma) plugged in.
RecursionResidual mc_recursion_residual(const MfgEquilibrium& eq, std::size_t type,
                                        const SimConfig& sim);

}  // namespace ezmfg
