#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "model.hpp"
#include "riccati.hpp"
#include "utility.hpp"

namespace ezmfg {

/// N >= 2 players on one grid; each player benchmarks against the geometric
/// mean consumption of the other N - 1.
struct NPlayerGame {
  std::vector<AgentType> players;
  TimeGrid grid;

  std::size_t size() const { return players.size(); }

  /// N identical copies of one type.
  static NPlayerGame symmetric(const AgentType& type, std::size_t n_players, TimeGrid grid);

  friend bool operator==(const NPlayerGame&, const NPlayerGame&) = default;
};

/// Per-player checks of module model plus the N-player guards: investment
/// denominator, 1 + psi^N and 1 - theta (psi - 1) / (N - 1), each away from 0.
ValidationResult validate(const NPlayerGame& game, Regime regime);

struct NPlayerAggregates {
  double phi = 0.0;
  double psi = 0.0;
};

/// gamma sigma^2 + (gamma - theta (1-gamma) / (N-1)) sigma0^2 for one player.
double nplayer_investment_denominator(const AgentType& player, std::size_t n_players, std::size_t cell);

NPlayerAggregates compute_aggregates(const NPlayerGame& game, double t);
NPlayerAggregates compute_aggregates_cell(const NPlayerGame& game, std::size_t cell);

/// pi[player][cell].
std::vector<std::vector<double>> solve_investment(const NPlayerGame& game);

struct NPlayerEquilibrium {
  NPlayerGame game;

  std::vector<std::vector<double>> pi;               // [i][cell]
  std::vector<std::vector<double>> Zi0;              // [i][cell]
  std::vector<std::vector<std::vector<double>>> Zij;  // [i][j][cell], zero for j = i
  std::vector<double> a, b;
  std::vector<std::vector<double>> A, B;  // [i][cell]
  std::vector<double> D;
  std::vector<double> phiN, psiN;  // per cell
  std::vector<RiccatiClosedForm> consumption_curves;
  std::vector<std::vector<double>> c;  // [i][grid point], c(T) = 1

  std::size_t size() const { return game.size(); }
  const TimeGrid& grid() const { return game.grid; }
  double consumption(std::size_t i, double t) const { return consumption_curves[i].value(t); }
  /// int_0^t (r + pi h - c - pi^2 (sigma^2 + sigma0^2) / 2) for one player.
  double log_wealth_drift_integral(std::size_t i, double t) const;
};

/// Consumption block: Z^{i0}, Z^{ij}, a, b, A, B, D and the Riccati curves.
/// The investment block must already be filled in.
void solve_consumption_n(NPlayerEquilibrium& eq);

/// Validates nothing; the game must already be valid.
NPlayerEquilibrium solve_nplayer(const NPlayerGame& game);

/// Log benchmark seen by player i: mean over j != i of log c^j + log X^j.
Externality nplayer_externality(const NPlayerEquilibrium& eq, std::size_t player);
ProportionalStrategy nplayer_strategy(const NPlayerEquilibrium& eq, std::size_t player);

struct LimitRow {
  std::size_t n_players = 0;
  double pi_gap = 0.0;  // sup over cells of |pi_N - pi_MFG|
  double c_gap = 0.0;   // sup over grid points of |c_N - c_MFG|
};

struct LimitReport {
  std::vector<LimitRow> rows;
  double pi_slope = 0.0;  // least-squares slope of log gap against log N
  double c_slope = 0.0;
  bool pi_coincident = false;  // every pi gap <= 1e-10
  bool c_coincident = false;
  bool pi_non_increasing = false;
  bool c_non_increasing = false;

  bool pass() const;
};

/// Gaps between i.i.d. N-player games and the single-type mean-field game.
LimitReport mfg_limit_report(const AgentType& type, const std::vector<std::size_t>& ns,
                             const TimeGrid& grid);

}  // namespace ezmfg
