#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "grid.hpp"

namespace ezmfg {

enum class Regime {
  Primary,      // psi*gamma >= 1, psi > 1
  Alternative,  // psi*gamma <= 1, gamma < 1, psi > 1
};

const char* to_string(Regime regime);

/// Epstein-Zin preference parameters of one agent type.
struct PreferenceParams {
  double delta = 0.1;  // discount rate
  double gamma = 2.0;  // relative risk aversion
  double psi = 2.0;    // elasticity of intertemporal substitution
  double theta = 0.0;  // competition weight on the benchmark
  double alpha = 1.0;  // bequest weight

  /// (1 - gamma) / (1 - 1/psi); always derived, never stored.
  double theta_tilde() const { return (1.0 - gamma) / (1.0 - 1.0 / psi); }
  /// psi / theta_tilde, written in the form that stays finite as gamma -> 1.
  double psi_over_theta_tilde() const { return (psi - 1.0) / (1.0 - gamma); }

  friend bool operator==(const PreferenceParams&, const PreferenceParams&) = default;
};

/// Market coefficients of one type, piecewise constant on the shared grid
/// (one value per cell).
struct MarketCoefficients {
  std::vector<double> r;       // interest rate
  std::vector<double> h;       // risk premium
  std::vector<double> sigma;   // idiosyncratic volatility
  std::vector<double> sigma0;  // common-noise volatility

  static MarketCoefficients constant(std::size_t n_cells, double r, double h, double sigma,
                                     double sigma0);

  std::size_t n_cells() const { return r.size(); }
  /// sigma^2 + sigma0^2 on a cell.
  double total_variance(std::size_t cell) const {
    return sigma[cell] * sigma[cell] + sigma0[cell] * sigma0[cell];
  }

  friend bool operator==(const MarketCoefficients&, const MarketCoefficients&) = default;
};

struct AgentType {
  PreferenceParams prefs;
  MarketCoefficients market;
  double x0 = 1.0;

  friend bool operator==(const AgentType&, const AgentType&) = default;
};

struct WeightedType {
  double weight = 1.0;
  AgentType type;

  friend bool operator==(const WeightedType&, const WeightedType&) = default;
};

/// Finite mixture of agent types sharing one horizon and time grid.
struct Population {
  std::vector<WeightedType> types;
  TimeGrid grid;

  std::size_t size() const { return types.size(); }
  double horizon() const { return grid.horizon(); }
  const AgentType& type(std::size_t k) const { return types[k].type; }
  double weight(std::size_t k) const { return types[k].weight; }

  friend bool operator==(const Population&, const Population&) = default;
};

struct Violation {
  std::string where;    // e.g. "population[1].prefs.psi"
  std::string message;  // e.g. "psi must exceed 1"
};

struct ValidationResult {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  explicit operator bool() const { return ok(); }
  /// All violations joined as "where: message; ...".
  std::string summary() const;
};

/// Equilibrium denominators below this are treated as singular.
inline constexpr double kSingularityThreshold = 1e-6;

/// Checks parameter regime, positivity, grid layout and the mean-field
/// denominator 1 + E[theta (1-gamma) sigma0^2 / (gamma (sigma^2 + sigma0^2))].
ValidationResult validate(const Population& population, Regime regime);

/// Validates the preference block of one type; used by the N-player game too.
void validate_preferences(const PreferenceParams& prefs, Regime regime, const std::string& where,
                          std::vector<Violation>& out);
void validate_market(const MarketCoefficients& market, std::size_t n_cells,
                     const std::string& where, std::vector<Violation>& out);

using TypeExtractor = std::function<double(const AgentType&, std::size_t cell)>;

/// sum_k w_k * extractor(type_k, cell(t)); t must be a grid point.
double population_mean(const Population& population, const TypeExtractor& extractor, double t);

/// Cell-indexed variant used by the solvers.
double population_mean_cell(const Population& population, const TypeExtractor& extractor,
                            std::size_t cell);

/// Weighted mean of a per-type vector.
double weighted_mean(const Population& population, const std::vector<double>& per_type);

/// 1 + E[theta (1-gamma) sigma0^2 / (gamma (sigma^2 + sigma0^2))] on a cell.
double mean_field_denominator(const Population& population, std::size_t cell);

}  // namespace ezmfg
