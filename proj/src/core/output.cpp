#include "output.hpp"

#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include <openssl/crypto.h>
#include <openssl/evp.h>

namespace ezmfg {

using nlohmann::json;

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v == 0.0 ? 0.0 : v); }

// JSON has no NaN or infinity; nlohmann writes null for them anyway, this
// just makes it explicit.
json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string equilibrium_csv(const MfgEquilibrium& eq) {
  std::string out = "t,type_id,pi_star,c_star,Z0,A,B,Y_tilde\n";
  const auto& g = eq.grid();
  for (std::size_t i = 0; i < g.n_points(); ++i) {
    const std::size_t cell = std::min(i, g.n_cells() - 1);
    for (std::size_t k = 0; k < eq.n_types(); ++k) {
      out += fmt::format("{},{},{},{},{},{},{},{}\n", num(g[i]), k, num(eq.pi_star[k][cell]),
                         num(eq.c_star[k][i]), num(eq.Z0[k][cell]), num(eq.riccati.A[k][cell]),
                         num(eq.riccati.B[k][cell]), num(eq.Y_tilde[k][i]));
    }
  }
  return out;
}

std::string nplayer_csv(const NPlayerEquilibrium& eq) {
  std::string out = "t,player_id,pi,c,Zi0\n";
  const auto& g = eq.grid();
  for (std::size_t i = 0; i < g.n_points(); ++i) {
    const std::size_t cell = std::min(i, g.n_cells() - 1);
    for (std::size_t p = 0; p < eq.size(); ++p)
      out += fmt::format("{},{},{},{},{}\n", num(g[i]), p, num(eq.pi[p][cell]), num(eq.c[p][i]),
                         num(eq.Zi0[p][cell]));
  }
  return out;
}

json check_json(const CheckResult& c) {
  json entries = json::array();
  for (const auto& e : c.entries) {
    json j = {{"label", e.label},
              {"t", e.t},
              {"estimate", number_or_null(e.estimate)},
              {"reference", number_or_null(e.reference)},
              {"std_error", number_or_null(e.std_error)},
              {"tolerance", number_or_null(e.tolerance)},
              {"pass", e.pass}};
    if (!e.note.empty()) j["note"] = e.note;
    entries.push_back(std::move(j));
  }
  json out = {{"name", c.name}, {"pass", c.pass}, {"statistic", number_or_null(c.statistic)},
              {"detail", c.detail}, {"entries", std::move(entries)}};
  if (c.skipped) out["skipped"] = true;
  return out;
}

json report_json(const SimulationReport& r) {
  json checks = json::array();
  for (const auto& c : r.checks) checks.push_back(check_json(c));
  json paths = json::array();
  for (const auto& p : r.paths)
    paths.push_back({{"type_id", p.type}, {"t", p.t}, {"mean_log_x", p.mean_log_x}, {"var_log_x", p.var_log_x}});
  json out = {{"pass", r.all_pass()}, {"checks", std::move(checks)}};
  if (!paths.empty()) out["paths"] = std::move(paths);
  return out;
}

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

json meta_json(const RunConfig& config, const std::string& command) {
  const std::string canonical = to_json(config).dump();
  return {{"command", command},
          {"config_sha256", sha256_hex(canonical)},
          {"seed", config.sim.seed},
          {"versions",
           {{"ezmfg", kVersion},
            {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)},
            {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                          NLOHMANN_JSON_VERSION_PATCH)},
            {"openssl", OpenSSL_version(OPENSSL_VERSION)},
            {"compiler", fmt::format("gcc {}.{}.{}", __GNUC__, __GNUC_MINOR__, __GNUC_PATCHLEVEL__)}}}};
}

void write_file(const std::string& dir, const std::string& name, const std::string& text) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace ezmfg
