#include "model.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ezmfg {

const char* to_string(Regime regime) {
  return regime == Regime::Primary ? "primary" : "alternative";
}

MarketCoefficients MarketCoefficients::constant(std::size_t n_cells, double r, double h,
                                                double sigma, double sigma0) {
  return MarketCoefficients{std::vector<double>(n_cells, r), std::vector<double>(n_cells, h),
                            std::vector<double>(n_cells, sigma),
                            std::vector<double>(n_cells, sigma0)};
}

std::string ValidationResult::summary() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].where << ": " << violations[i].message;
  }
  return os.str();
}

void validate_preferences(const PreferenceParams& p, Regime regime, const std::string& where,
                          std::vector<Violation>& out) {
  auto add = [&](const std::string& field, const std::string& msg) {
    out.push_back({where + "." + field, msg});
  };
  for (double v : {p.delta, p.gamma, p.psi, p.theta, p.alpha}) {
    if (!std::isfinite(v)) {
      add("prefs", "preference parameters must be finite");
      return;
    }
  }
  if (!(p.delta > 0.0)) add("delta", "delta must be positive");
  if (!(p.gamma > 0.0)) add("gamma", "gamma must be positive");
  if (p.gamma == 1.0) add("gamma", "gamma must differ from 1");
  if (!(p.psi > 1.0)) add("psi", "psi must exceed 1");
  if (!(p.theta >= 0.0)) add("theta", "theta must be non-negative");
  if (!(p.alpha > 0.0)) add("alpha", "alpha must be positive");
  if (!(p.psi > 1.0) || !(p.gamma > 0.0)) return;

  const double pg = p.psi * p.gamma;
  if (regime == Regime::Primary) {
    if (pg < 1.0) add("psi", "primary regime requires psi*gamma >= 1");
  } else {
    if (pg > 1.0) add("psi", "alternative regime requires psi*gamma <= 1");
    if (!(p.gamma < 1.0)) add("gamma", "alternative regime requires gamma < 1");
  }
}

void validate_market(const MarketCoefficients& m, std::size_t n_cells, const std::string& where,
                     std::vector<Violation>& out) {
  const std::pair<const char*, const std::vector<double>*> fields[] = {
      {"r", &m.r}, {"h", &m.h}, {"sigma", &m.sigma}, {"sigma0", &m.sigma0}};
  bool shapes_ok = true;
  for (const auto& [name, values] : fields) {
    if (values->size() != n_cells) {
      out.push_back({where + ".market." + name, "expected " + std::to_string(n_cells) +
                                                    " cell values, got " +
                                                    std::to_string(values->size())});
      shapes_ok = false;
      continue;
    }
    for (double v : *values) {
      if (!std::isfinite(v)) {
        out.push_back({where + ".market." + name, "coefficient paths must be finite"});
        shapes_ok = false;
        break;
      }
    }
  }
  if (!shapes_ok) return;
  for (std::size_t j = 0; j < n_cells; ++j) {
    if (!(m.total_variance(j) > 0.0)) {
      out.push_back({where + ".market", "sigma^2 + sigma0^2 must be positive (cell " +
                                            std::to_string(j) + ")"});
      break;
    }
  }
}

ValidationResult validate(const Population& population, Regime regime) {
  ValidationResult result;
  auto& out = result.violations;
  if (population.types.empty()) {
    out.push_back({"population", "population must contain at least one type"});
    return result;
  }
  if (population.grid.n_points() < 2) {
    out.push_back({"grid", "time grid must have at least one cell"});
    return result;
  }
  const auto pts = population.grid.points();
  if (pts.front() != 0.0) out.push_back({"grid", "grid must start at 0"});
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i] > pts[i - 1])) {
      out.push_back({"grid", "grid must be strictly increasing"});
      break;
    }
  }
  if (!(population.horizon() > 0.0)) out.push_back({"T", "horizon T must be positive"});

  const std::size_t n_cells = population.grid.n_cells();
  double weight_sum = 0.0;
  for (std::size_t k = 0; k < population.size(); ++k) {
    const std::string where = "population[" + std::to_string(k) + "]";
    const auto& wt = population.types[k];
    if (!(wt.weight > 0.0) || !std::isfinite(wt.weight))
      out.push_back({where + ".weight", "weights must be positive"});
    weight_sum += wt.weight;
    if (!(wt.type.x0 > 0.0) || !std::isfinite(wt.type.x0))
      out.push_back({where + ".x0", "initial wealth x0 must be positive"});
    validate_preferences(wt.type.prefs, regime, where + ".prefs", out);
    validate_market(wt.type.market, n_cells, where, out);
  }
  if (std::abs(weight_sum - 1.0) > 1e-12)
    out.push_back({"population", "weights must sum to 1 (got " + std::to_string(weight_sum) + ")"});
  if (!result.ok()) return result;

  for (std::size_t j = 0; j < n_cells; ++j) {
    const double denom = mean_field_denominator(population, j);
    if (!(denom >= kSingularityThreshold)) {
      out.push_back({"population", "singular equilibrium denominator at t = " +
                                       std::to_string(population.grid[j]) + " (value " +
                                       std::to_string(denom) + ")"});
      break;
    }
  }
  return result;
}

double population_mean_cell(const Population& population, const TypeExtractor& extractor,
                            std::size_t cell) {
  double acc = 0.0;
  for (const auto& wt : population.types) acc += wt.weight * extractor(wt.type, cell);
  return acc;
}

double population_mean(const Population& population, const TypeExtractor& extractor, double t) {
  const std::size_t idx = population.grid.index_of(t);
  const std::size_t cell = std::min(idx, population.grid.n_cells() - 1);
  return population_mean_cell(population, extractor, cell);
}

double weighted_mean(const Population& population, const std::vector<double>& per_type) {
  if (per_type.size() != population.size())
    throw std::invalid_argument("weighted_mean: one value per type expected");
  double acc = 0.0;
  for (std::size_t k = 0; k < per_type.size(); ++k) acc += population.weight(k) * per_type[k];
  return acc;
}

double mean_field_denominator(const Population& population, std::size_t cell) {
  return 1.0 + population_mean_cell(
                   population,
                   [](const AgentType& a, std::size_t j) {
                     const auto& p = a.prefs;
                     const double s0 = a.market.sigma0[j];
                     return p.theta * (1.0 - p.gamma) * s0 * s0 /
                            (p.gamma * a.market.total_variance(j));
                   },
                   cell);
}

}  // namespace ezmfg
