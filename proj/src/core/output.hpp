#pragma once

#include <string>

#include "config.hpp"
#include "json.hpp"
#include "mfg_solver.hpp"
#include "nplayer_solver.hpp"
#include "simulate.hpp"

namespace ezmfg {

inline constexpr const char* kVersion = "0.1.0";

/// t,type_id,pi_star,c_star,Z0,A,B,Y_tilde at every grid point; cell data at
/// T is the left limit.
std::string equilibrium_csv(const MfgEquilibrium& eq);

/// t,player_id,pi,c,Zi0 at every grid point.
std::string nplayer_csv(const NPlayerEquilibrium& eq);

nlohmann::json check_json(const CheckResult& check);
nlohmann::json report_json(const SimulationReport& report);

/// Lowercase hex SHA-256.
std::string sha256_hex(const std::string& data);

/// Config hash, seed and library versions; no timestamps or host details.
nlohmann::json meta_json(const RunConfig& config, const std::string& command);

/// Writes text to dir/name, creating dir if needed; throws std::runtime_error.
void write_file(const std::string& dir, const std::string& name, const std::string& text);

}  // namespace ezmfg
