#pragma once

#include <cstddef>

#include "model.hpp"

namespace ezmfg::testing {

// gamma = 2, psi = 2, delta = 0.1, alpha = 1, theta = 0.5 in the market
// r = 0.02, h = 0.05, sigma = 0.2, sigma0 = 0.1.
inline AgentType worked_type(std::size_t n_cells = 100) {
  AgentType a;
  a.prefs = {0.1, 2.0, 2.0, 0.5, 1.0};
  a.market = MarketCoefficients::constant(n_cells, 0.02, 0.05, 0.2, 0.1);
  a.x0 = 1.0;
  return a;
}

inline AgentType second_type(std::size_t n_cells = 100) {
  AgentType a;
  a.prefs = {0.05, 3.0, 1.5, 0.3, 2.0};
  a.market = MarketCoefficients::constant(n_cells, 0.03, 0.06, 0.25, 0.15);
  a.x0 = 2.0;
  return a;
}

inline Population single(const AgentType& a, double T = 1.0, std::size_t n_cells = 100) {
  Population p;
  p.grid = TimeGrid::uniform(T, n_cells);
  p.types.push_back({1.0, a});
  return p;
}

inline Population mixture(std::initializer_list<std::pair<double, AgentType>> types, double T = 1.0,
                          std::size_t n_cells = 100) {
  Population p;
  p.grid = TimeGrid::uniform(T, n_cells);
  for (const auto& [w, a] : types) p.types.push_back({w, a});
  return p;
}

}  // namespace ezmfg::testing
