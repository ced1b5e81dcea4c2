#include "nplayer_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "mfg_solver.hpp"

namespace ezmfg {

namespace {

std::string player_name(std::size_t i) { return "players[" + std::to_string(i) + "]"; }

double tau(const PreferenceParams& p, std::size_t n) {
  return p.theta * (p.psi - 1.0) / static_cast<double>(n - 1);
}

double log_bequest(const PreferenceParams& p) {
  return -p.psi * std::log(p.delta) + p.psi_over_theta_tilde() * std::log(p.alpha);
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

}  // namespace

NPlayerGame NPlayerGame::symmetric(const AgentType& type, std::size_t n_players, TimeGrid grid) {
  return NPlayerGame{std::vector<AgentType>(n_players, type), std::move(grid)};
}

double nplayer_investment_denominator(const AgentType& a, std::size_t n, std::size_t j) {
  const auto& p = a.prefs;
  const double s = a.market.sigma[j], s0 = a.market.sigma0[j];
  return p.gamma * s * s + (p.gamma - p.theta * (1.0 - p.gamma) / static_cast<double>(n - 1)) * s0 * s0;
}

ValidationResult validate(const NPlayerGame& game, Regime regime) {
  ValidationResult result;
  auto& out = result.violations;
  const std::size_t n = game.size();
  if (n < 2) {
    out.push_back({"players", "an N-player game needs at least 2 players"});
    return result;
  }
  if (game.grid.n_points() < 2) {
    out.push_back({"grid", "time grid must have at least one cell"});
    return result;
  }
  const std::size_t m = game.grid.n_cells();
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = game.players[i];
    const std::string where = player_name(i);
    if (!(a.x0 > 0.0) || !std::isfinite(a.x0)) out.push_back({where + ".x0", "initial wealth x0 must be positive"});
    validate_preferences(a.prefs, regime, where + ".prefs", out);
    validate_market(a.market, m, where, out);
  }
  if (!result.ok()) return result;

  for (std::size_t i = 0; i < n; ++i) {
    if (!(std::abs(1.0 - tau(game.players[i].prefs, n)) >= kSingularityThreshold))
      out.push_back({player_name(i) + ".prefs",
                     "singular consumption coupling 1 - theta (psi - 1) / (N - 1)"});
    for (std::size_t j = 0; j < m; ++j) {
      if (!(std::abs(nplayer_investment_denominator(game.players[i], n, j)) >= kSingularityThreshold)) {
        out.push_back({player_name(i), "singular investment denominator at t = " +
                                           std::to_string(game.grid[j])});
        break;
      }
    }
  }
  if (!result.ok()) return result;
  for (std::size_t j = 0; j < m; ++j) {
    const auto agg = compute_aggregates_cell(game, j);
    if (!(std::abs(1.0 + agg.psi) >= kSingularityThreshold)) {
      out.push_back({"players", "singular equilibrium denominator 1 + psi^N at t = " +
                                    std::to_string(game.grid[j])});
      break;
    }
  }
  double a_sum = 0.0;
  for (const auto& pl : game.players) a_sum += pl.prefs.theta * (pl.prefs.psi - 1.0) / (1.0 - tau(pl.prefs, n));
  if (!(std::abs(1.0 + a_sum / static_cast<double>(n - 1)) >= kSingularityThreshold))
    out.push_back({"players", "singular consumption denominator 1 + sum a / (N - 1)"});
  return result;
}

NPlayerAggregates compute_aggregates_cell(const NPlayerGame& game, std::size_t j) {
  const std::size_t n = game.size();
  NPlayerAggregates agg;
  for (const auto& a : game.players) {
    const double den = nplayer_investment_denominator(a, n, j);
    const double s0 = a.market.sigma0[j];
    agg.phi += a.market.h[j] * s0 / den;
    agg.psi += a.prefs.theta * (1.0 - a.prefs.gamma) * s0 * s0 / den;
  }
  agg.phi /= static_cast<double>(n - 1);
  agg.psi /= static_cast<double>(n - 1);
  return agg;
}

NPlayerAggregates compute_aggregates(const NPlayerGame& game, double t) {
  const std::size_t idx = game.grid.index_of(t);
  return compute_aggregates_cell(game, std::min(idx, game.grid.n_cells() - 1));
}

std::vector<std::vector<double>> solve_investment(const NPlayerGame& game) {
  const std::size_t n = game.size(), m = game.grid.n_cells();
  std::vector<std::vector<double>> pi(n, std::vector<double>(m));
  for (std::size_t j = 0; j < m; ++j) {
    const auto agg = compute_aggregates_cell(game, j);
    if (!(std::abs(1.0 + agg.psi) >= kSingularityThreshold))
      throw std::domain_error("singular equilibrium denominator 1 + psi^N at cell " + std::to_string(j));
    const double common = agg.phi / (1.0 + agg.psi);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = game.players[i];
      const double den = nplayer_investment_denominator(a, n, j);
      if (!(std::abs(den) >= kSingularityThreshold))
        throw std::domain_error(player_name(i) + ": singular investment denominator");
      pi[i][j] = a.market.h[j] / den -
                 a.prefs.theta * (1.0 - a.prefs.gamma) * a.market.sigma0[j] / den * common;
    }
  }
  return pi;
}

void solve_consumption_n(NPlayerEquilibrium& eq) {
  const auto& game = eq.game;
  const std::size_t n = game.size(), m = game.grid.n_cells();
  const double n1 = static_cast<double>(n - 1);

  eq.a.assign(n, 0.0);
  eq.b.assign(n, 0.0);
  double a_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = game.players[i].prefs;
    const double one_minus_tau = 1.0 - tau(p, n);
    if (!(std::abs(one_minus_tau) >= kSingularityThreshold))
      throw std::domain_error(player_name(i) + ": singular consumption coupling");
    eq.a[i] = p.theta * (p.psi - 1.0) / one_minus_tau;
    eq.b[i] = p.psi_over_theta_tilde() / one_minus_tau;
    a_sum += eq.a[i];
  }
  const double a_den = 1.0 + a_sum / n1;
  if (!(std::abs(a_den) >= kSingularityThreshold))
    throw std::domain_error("singular consumption denominator 1 + sum a / (N - 1)");

  eq.Zi0.assign(n, std::vector<double>(m));
  eq.Zij.assign(n, std::vector<std::vector<double>>(n, std::vector<double>(m, 0.0)));
  eq.A.assign(n, std::vector<double>(m));
  eq.B.assign(n, std::vector<double>(m));
  for (std::size_t j = 0; j < m; ++j) {
    double exposure_sum = 0.0, drift_sum = 0.0;
    std::vector<double> drift(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto& mk = game.players[k].market;
      const double p = eq.pi[k][j];
      exposure_sum += p * mk.sigma0[j];
      drift[k] = mk.r[j] + p * mk.h[j] - 0.5 * p * p * mk.total_variance(j);
      drift_sum += drift[k];
    }
    double scaled_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = game.players[i].prefs;
      const auto& mi = game.players[i].market;
      const double coupling = p.theta * (1.0 - p.gamma) / n1;
      const double own = eq.pi[i][j] * mi.sigma0[j];
      eq.Zi0[i][j] = -coupling * (exposure_sum - own);
      double zij_sq = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        if (k == i) continue;
        eq.Zij[i][k][j] = -coupling * eq.pi[k][j] * game.players[k].market.sigma[j];
        zij_sq += eq.Zij[i][k][j] * eq.Zij[i][k][j];
      }
      const double excess = mi.h[j] + mi.sigma0[j] * eq.Zi0[i][j];
      eq.A[i][j] = -coupling * (drift_sum - drift[i]) + 0.5 * eq.Zi0[i][j] * eq.Zi0[i][j] +
                   0.5 * zij_sq + (1.0 - p.gamma) * mi.r[j] +
                   (1.0 - p.gamma) / (2.0 * p.gamma) * excess * excess / mi.total_variance(j) -
                   p.delta * p.theta_tilde();
      scaled_sum += eq.b[i] * eq.A[i][j];
    }
    for (std::size_t i = 0; i < n; ++i)
      eq.B[i][j] = eq.b[i] * eq.A[i][j] - eq.a[i] / a_den * scaled_sum / n1;
  }

  // Terminal values from Y^i(T) = m^i through the N-player consumption map.
  double m_sum = 0.0;
  std::vector<double> m_scaled(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = game.players[i].prefs;
    m_scaled[i] = log_bequest(p) / (1.0 - tau(p, n));
    m_sum += m_scaled[i];
  }
  eq.D.assign(n, 0.0);
  eq.consumption_curves.clear();
  for (std::size_t i = 0; i < n; ++i) {
    eq.D[i] = std::exp(-m_scaled[i] + eq.a[i] / n1 * m_sum / a_den);
    eq.consumption_curves.emplace_back(game.grid, eq.B[i], eq.D[i]);
  }
  const std::size_t np = game.grid.n_points();
  eq.c.assign(n, std::vector<double>(np));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < np; ++k)
      eq.c[i][k] = k + 1 == np ? 1.0 : eq.consumption(i, game.grid[k]);
}

NPlayerEquilibrium solve_nplayer(const NPlayerGame& game) {
  if (game.size() < 2) throw std::invalid_argument("an N-player game needs at least 2 players");
  NPlayerEquilibrium eq;
  eq.game = game;
  const std::size_t m = game.grid.n_cells();
  eq.phiN.resize(m);
  eq.psiN.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const auto agg = compute_aggregates_cell(game, j);
    eq.phiN[j] = agg.phi;
    eq.psiN[j] = agg.psi;
  }
  eq.pi = solve_investment(game);

  // The closed form must agree with the best-response form
  // pi^i = (h^i + sigma^{i0} Z^{i0}) / (gamma^i (sigma^2 + sigma0^2)).
  solve_consumption_n(eq);
  for (std::size_t i = 0; i < game.size(); ++i) {
    const auto& a = game.players[i];
    for (std::size_t j = 0; j < m; ++j) {
      const double via_z = (a.market.h[j] + a.market.sigma0[j] * eq.Zi0[i][j]) /
                           (a.prefs.gamma * a.market.total_variance(j));
      if (std::abs(via_z - eq.pi[i][j]) > 1e-9 * (1.0 + std::abs(via_z)))
        throw std::logic_error(player_name(i) + ": investment closed forms disagree");
    }
  }
  return eq;
}

double NPlayerEquilibrium::log_wealth_drift_integral(std::size_t i, double t) const {
  const auto& g = grid();
  const auto& mk = game.players[i].market;
  double acc = 0.0;
  for (std::size_t j = 0; j < g.n_cells() && g[j] < t; ++j) {
    const double hi = std::min(t, g[j + 1]);
    const double p = pi[i][j];
    acc += (mk.r[j] + p * mk.h[j] - 0.5 * p * p * mk.total_variance(j)) * (hi - g[j]);
  }
  return acc - consumption_curves[i].integral(0.0, t);
}

Externality nplayer_externality(const NPlayerEquilibrium& eq, std::size_t player) {
  const std::size_t n = eq.size(), m = eq.grid().n_cells();
  const double n1 = static_cast<double>(n - 1);
  Externality ext;
  ext.log_level = [&eq, player, n, n1](double t) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == player) continue;
      acc += std::log(eq.consumption(j, t)) + std::log(eq.game.players[j].x0) +
             eq.log_wealth_drift_integral(j, t);
    }
    return acc / n1;
  };
  const double T = eq.grid().horizon();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == player) continue;
    ext.terminal_log_level += (std::log(eq.game.players[j].x0) + eq.log_wealth_drift_integral(j, T)) / n1;
  }
  ext.common_exposure.assign(m, 0.0);
  ext.orthogonal_variance.assign(m, 0.0);
  for (std::size_t c = 0; c < m; ++c) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == player) continue;
      const auto& mk = eq.game.players[j].market;
      ext.common_exposure[c] += eq.pi[j][c] * mk.sigma0[c] / n1;
      const double v = eq.pi[j][c] * mk.sigma[c] / n1;
      ext.orthogonal_variance[c] += v * v;
    }
  }
  return ext;
}

ProportionalStrategy nplayer_strategy(const NPlayerEquilibrium& eq, std::size_t player) {
  ProportionalStrategy s;
  s.pi = eq.pi[player];
  s.consumption = [&eq, player](double t) { return eq.consumption(player, t); };
  s.consumption_integral = [&eq, player](double a, double b) {
    return eq.consumption_curves[player].integral(a, b);
  };
  return s;
}

bool LimitReport::pass() const {
  const bool pi_ok = pi_coincident || (pi_non_increasing && pi_slope <= -0.9);
  const bool c_ok = c_coincident || (c_non_increasing && c_slope <= -0.9);
  return pi_ok && c_ok;
}

LimitReport mfg_limit_report(const AgentType& type, const std::vector<std::size_t>& ns,
                             const TimeGrid& grid) {
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 2) throw std::invalid_argument("player counts must be at least 2");
    if (i && ns[i] <= ns[i - 1]) throw std::invalid_argument("player counts must be increasing");
  }
  Population pop;
  pop.types.push_back({1.0, type});
  pop.grid = grid;
  const auto mfg = solve_mfg(pop);

  LimitReport rep;
  for (std::size_t n : ns) {
    const auto eq = solve_nplayer(NPlayerGame::symmetric(type, n, grid));
    LimitRow row{n, 0.0, 0.0};
    for (std::size_t j = 0; j < grid.n_cells(); ++j)
      row.pi_gap = std::max(row.pi_gap, std::abs(eq.pi[0][j] - mfg.pi_star[0][j]));
    for (std::size_t k = 0; k < grid.n_points(); ++k)
      row.c_gap = std::max(row.c_gap, std::abs(eq.c[0][k] - mfg.c_star[0][k]));
    rep.rows.push_back(row);
  }

  constexpr double kCoincident = 1e-10;
  auto analyse = [&](auto gap_of, double& slope, bool& coincident, bool& non_increasing) {
    coincident = true;
    non_increasing = true;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
      const double g = gap_of(rep.rows[i]);
      coincident = coincident && g <= kCoincident;
      if (i) non_increasing = non_increasing && g <= gap_of(rep.rows[i - 1]) + 1e-14;
      if (g > 0.0) {
        x.push_back(std::log(static_cast<double>(rep.rows[i].n_players)));
        y.push_back(std::log(g));
      }
    }
    slope = x.size() >= 2 ? least_squares_slope(x, y) : 0.0;
  };
  analyse([](const LimitRow& r) { return r.pi_gap; }, rep.pi_slope, rep.pi_coincident, rep.pi_non_increasing);
  analyse([](const LimitRow& r) { return r.c_gap; }, rep.c_slope, rep.c_coincident, rep.c_non_increasing);
  return rep;
}

}  // namespace ezmfg
