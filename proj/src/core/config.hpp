#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "model.hpp"
#include "nplayer_solver.hpp"
#include "simulate.hpp"

namespace ezmfg {

/// Parse or schema error; `pointer` is the JSON pointer of the offending value.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message);
  const std::string& pointer() const { return pointer_; }

 private:
  std::string pointer_;
};

/// Either explicit per-type player counts or a total count split by weight.
struct NPlayerSpec {
  std::vector<std::size_t> counts;  // players per population type

  friend bool operator==(const NPlayerSpec&, const NPlayerSpec&) = default;
};

struct RunConfig {
  Regime regime = Regime::Primary;
  double T = 1.0;
  std::size_t n_cells = 100;
  Population population;
  NPlayerSpec nplayer;
  SimConfig sim;
  std::vector<double> eps{-0.1, -0.05, -0.01, 0.01, 0.05, 0.1};
  std::vector<std::size_t> limit_ns{2, 4, 8, 16, 32};

  NPlayerGame nplayer_game() const;

  friend bool operator==(const RunConfig& a, const RunConfig& b);
};

/// Command-line overrides applied before coefficient arrays are broadcast.
struct ConfigOverrides {
  std::optional<double> dt;
  std::optional<std::size_t> paths;
  std::optional<std::uint64_t> seed;
  std::optional<std::vector<double>> eps;
};

RunConfig parse_config(const nlohmann::json& doc, const ConfigOverrides& overrides = {});
RunConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides = {});
RunConfig load_config(const std::string& path, const ConfigOverrides& overrides = {});

/// Normalized form: every coefficient written out per cell.
nlohmann::json to_json(const RunConfig& config);
std::string to_json_text(const RunConfig& config);

}  // namespace ezmfg
