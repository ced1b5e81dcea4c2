#include "config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace ezmfg {

using nlohmann::json;

ConfigError::ConfigError(std::string pointer, const std::string& message)
    : std::runtime_error((pointer.empty() ? std::string("/") : pointer) + ": " + message),
      pointer_(std::move(pointer)) {}

namespace {

std::string child(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }
std::string child(const std::string& ptr, std::size_t idx) { return ptr + "/" + std::to_string(idx); }

void only_keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(ptr, "expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, _] : obj.items())
    if (!ok.count(key)) throw ConfigError(child(ptr, key), "unknown field");
}

const json& require(const json& obj, const std::string& ptr, const char* key) {
  if (!obj.contains(key)) throw ConfigError(child(ptr, key), "missing required field");
  return obj.at(key);
}

double number(const json& v, const std::string& ptr) {
  if (!v.is_number()) throw ConfigError(ptr, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(ptr, "expected a finite number");
  return d;
}

std::uint64_t unsigned_int(const json& v, const std::string& ptr) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  throw ConfigError(ptr, "expected a non-negative integer");
}

bool boolean(const json& v, const std::string& ptr) {
  if (!v.is_boolean()) throw ConfigError(ptr, "expected true or false");
  return v.get<bool>();
}

std::vector<double> number_list(const json& v, const std::string& ptr) {
  if (!v.is_array()) throw ConfigError(ptr, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], child(ptr, i)));
  return out;
}

// Scalar broadcast to every cell, or an array with exactly one value per cell.
std::vector<double> cell_path(const json& v, const std::string& ptr, std::size_t n_cells) {
  if (v.is_number()) return std::vector<double>(n_cells, number(v, ptr));
  if (!v.is_array()) throw ConfigError(ptr, "expected a number or an array of per-cell numbers");
  if (v.size() != n_cells)
    throw ConfigError(ptr, fmt::format("expected {} per-cell values, got {}", n_cells, v.size()));
  return number_list(v, ptr);
}

Regime parse_regime(const json& v, const std::string& ptr) {
  if (v == "primary") return Regime::Primary;
  if (v == "alternative") return Regime::Alternative;
  throw ConfigError(ptr, "expected \"primary\" or \"alternative\"");
}

AgentType parse_type(const json& obj, const std::string& ptr, std::size_t n_cells, double& weight) {
  only_keys(obj, ptr, {"weight", "x0", "prefs", "market"});
  AgentType a;
  weight = obj.contains("weight") ? number(obj["weight"], child(ptr, "weight")) : 1.0;
  a.x0 = obj.contains("x0") ? number(obj["x0"], child(ptr, "x0")) : 1.0;

  const std::string pp = child(ptr, "prefs");
  const auto& prefs = require(obj, ptr, "prefs");
  only_keys(prefs, pp, {"delta", "gamma", "psi", "theta", "alpha"});
  a.prefs.delta = number(require(prefs, pp, "delta"), child(pp, "delta"));
  a.prefs.gamma = number(require(prefs, pp, "gamma"), child(pp, "gamma"));
  a.prefs.psi = number(require(prefs, pp, "psi"), child(pp, "psi"));
  a.prefs.theta = prefs.contains("theta") ? number(prefs["theta"], child(pp, "theta")) : 0.0;
  a.prefs.alpha = prefs.contains("alpha") ? number(prefs["alpha"], child(pp, "alpha")) : 1.0;

  const std::string mp = child(ptr, "market");
  const auto& market = require(obj, ptr, "market");
  only_keys(market, mp, {"r", "h", "sigma", "sigma0"});
  a.market.r = cell_path(require(market, mp, "r"), child(mp, "r"), n_cells);
  a.market.h = cell_path(require(market, mp, "h"), child(mp, "h"), n_cells);
  a.market.sigma = cell_path(require(market, mp, "sigma"), child(mp, "sigma"), n_cells);
  a.market.sigma0 = cell_path(require(market, mp, "sigma0"), child(mp, "sigma0"), n_cells);
  return a;
}

std::size_t cells_for_dt(double T, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("/grid/n_cells", "--dt must be positive");
  const double ratio = T / dt;
  const auto n = static_cast<std::size_t>(std::llround(ratio));
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * std::max(1.0, ratio))
    throw ConfigError("/grid/n_cells", fmt::format("--dt {} does not divide T = {}", dt, T));
  return n;
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.regime == b.regime && a.T == b.T && a.n_cells == b.n_cells && a.population == b.population &&
         a.nplayer == b.nplayer && a.sim.n_paths == b.sim.n_paths && a.sim.seed == b.sim.seed &&
         a.sim.antithetic == b.sim.antithetic && a.sim.dt_report == b.sim.dt_report &&
         a.sim.substeps == b.sim.substeps && a.eps == b.eps && a.limit_ns == b.limit_ns;
}

NPlayerGame RunConfig::nplayer_game() const {
  NPlayerGame game;
  game.grid = population.grid;
  for (std::size_t k = 0; k < population.size(); ++k)
    for (std::size_t c = 0; c < nplayer.counts[k]; ++c) game.players.push_back(population.type(k));
  return game;
}

RunConfig parse_config(const json& doc, const ConfigOverrides& overrides) {
  only_keys(doc, "", {"regime", "T", "grid", "population", "sim", "nplayer", "verify"});
  RunConfig cfg;
  if (doc.contains("regime")) cfg.regime = parse_regime(doc["regime"], "/regime");
  cfg.T = number(require(doc, "", "T"), "/T");
  if (!(cfg.T > 0.0)) throw ConfigError("/T", "horizon T must be positive");

  if (doc.contains("grid")) {
    only_keys(doc["grid"], "/grid", {"n_cells"});
    cfg.n_cells = unsigned_int(require(doc["grid"], "/grid", "n_cells"), "/grid/n_cells");
    if (cfg.n_cells < 1) throw ConfigError("/grid/n_cells", "need at least one cell");
  }
  if (overrides.dt) cfg.n_cells = cells_for_dt(cfg.T, *overrides.dt);
  cfg.population.grid = TimeGrid::uniform(cfg.T, cfg.n_cells);

  const auto& pop = require(doc, "", "population");
  if (!pop.is_array() || pop.empty()) throw ConfigError("/population", "expected a non-empty array of types");
  for (std::size_t k = 0; k < pop.size(); ++k) {
    double w = 1.0;
    auto type = parse_type(pop[k], child("/population", k), cfg.n_cells, w);
    cfg.population.types.push_back({w, std::move(type)});
  }

  if (doc.contains("sim")) {
    const auto& s = doc["sim"];
    only_keys(s, "/sim", {"n_paths", "seed", "antithetic", "dt_report", "substeps"});
    if (s.contains("n_paths")) cfg.sim.n_paths = unsigned_int(s["n_paths"], "/sim/n_paths");
    if (s.contains("seed")) cfg.sim.seed = unsigned_int(s["seed"], "/sim/seed");
    if (s.contains("antithetic")) cfg.sim.antithetic = boolean(s["antithetic"], "/sim/antithetic");
    if (s.contains("dt_report")) cfg.sim.dt_report = number(s["dt_report"], "/sim/dt_report");
    if (s.contains("substeps")) cfg.sim.substeps = unsigned_int(s["substeps"], "/sim/substeps");
  }
  if (overrides.paths) cfg.sim.n_paths = *overrides.paths;
  if (overrides.seed) cfg.sim.seed = *overrides.seed;
  try {
    check_sim_config(cfg.sim, cfg.population.grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("/sim", e.what());
  }

  const std::size_t n_types = cfg.population.size();
  if (doc.contains("nplayer")) {
    const auto& np = doc["nplayer"];
    only_keys(np, "/nplayer", {"counts", "n_players"});
    if (np.contains("counts") == np.contains("n_players"))
      throw ConfigError("/nplayer", "give exactly one of counts or n_players");
    if (np.contains("counts")) {
      const auto& c = np["counts"];
      if (!c.is_array() || c.size() != n_types)
        throw ConfigError("/nplayer/counts", fmt::format("expected {} counts, one per type", n_types));
      for (std::size_t k = 0; k < c.size(); ++k)
        cfg.nplayer.counts.push_back(unsigned_int(c[k], child("/nplayer/counts", k)));
    } else {
      const auto n = unsigned_int(np["n_players"], "/nplayer/n_players");
      for (std::size_t k = 0; k < n_types; ++k) {
        const double share = cfg.population.weight(k) * static_cast<double>(n);
        const auto count = static_cast<std::size_t>(std::llround(share));
        if (std::abs(share - static_cast<double>(count)) > 1e-9)
          throw ConfigError("/nplayer/n_players", "weights times n_players must be whole numbers");
        cfg.nplayer.counts.push_back(count);
      }
    }
  } else {
    cfg.nplayer.counts.assign(n_types, n_types == 1 ? 2 : 1);
  }
  std::size_t total = 0;
  for (auto c : cfg.nplayer.counts) total += c;
  if (total < 2) throw ConfigError("/nplayer", "an N-player game needs at least 2 players");

  if (doc.contains("verify")) {
    const auto& v = doc["verify"];
    only_keys(v, "/verify", {"eps", "limit_ns"});
    if (v.contains("eps")) cfg.eps = number_list(v["eps"], "/verify/eps");
    if (v.contains("limit_ns")) {
      const auto& l = v["limit_ns"];
      if (!l.is_array() || l.empty()) throw ConfigError("/verify/limit_ns", "expected a non-empty array");
      cfg.limit_ns.clear();
      for (std::size_t i = 0; i < l.size(); ++i) {
        const auto n = unsigned_int(l[i], child("/verify/limit_ns", i));
        if (n < 2) throw ConfigError(child("/verify/limit_ns", i), "player counts must be at least 2");
        if (i && n <= cfg.limit_ns.back())
          throw ConfigError(child("/verify/limit_ns", i), "player counts must be increasing");
        cfg.limit_ns.push_back(n);
      }
    }
  }
  if (overrides.eps) cfg.eps = *overrides.eps;
  return cfg;
}

RunConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc, overrides);
}

RunConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), overrides);
}

json to_json(const RunConfig& cfg) {
  json doc;
  doc["regime"] = to_string(cfg.regime);
  doc["T"] = cfg.T;
  doc["grid"] = {{"n_cells", cfg.n_cells}};
  json pop = json::array();
  for (const auto& wt : cfg.population.types) {
    const auto& a = wt.type;
    pop.push_back({{"weight", wt.weight},
                   {"x0", a.x0},
                   {"prefs",
                    {{"delta", a.prefs.delta},
                     {"gamma", a.prefs.gamma},
                     {"psi", a.prefs.psi},
                     {"theta", a.prefs.theta},
                     {"alpha", a.prefs.alpha}}},
                   {"market",
                    {{"r", a.market.r}, {"h", a.market.h}, {"sigma", a.market.sigma}, {"sigma0", a.market.sigma0}}}});
  }
  doc["population"] = pop;
  doc["sim"] = {{"n_paths", cfg.sim.n_paths},
                {"seed", cfg.sim.seed},
                {"antithetic", cfg.sim.antithetic},
                {"dt_report", cfg.sim.dt_report},
                {"substeps", cfg.sim.substeps}};
  doc["nplayer"] = {{"counts", cfg.nplayer.counts}};
  doc["verify"] = {{"eps", cfg.eps}, {"limit_ns", cfg.limit_ns}};
  return doc;
}

std::string to_json_text(const RunConfig& cfg) { return to_json(cfg).dump(2); }

}  // namespace ezmfg
