// Command-line front end; talks to the library only through the C API.
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ezmfg/ezmfg.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitVerification = 3;

struct Options {
  std::string config;
  std::string out = ".";
  std::optional<double> dt;
  std::optional<std::uint64_t> paths;
  std::optional<std::uint64_t> seed;
  std::vector<double> eps;
  std::string check;
};

int exit_code_for(ezmfg_status s) {
  switch (s) {
    case EZMFG_OK: return kExitOk;
    case EZMFG_E_ARGUMENT:
    case EZMFG_E_CONFIG:
    case EZMFG_E_VALIDATION:
    case EZMFG_E_NOT_APPLICABLE: return kExitConfig;
    default: return kExitInternal;
  }
}

int report_error(ezmfg_status s) {
  std::fprintf(stderr, "error (%s): %s\n", ezmfg_status_name(s), ezmfg_last_error());
  return exit_code_for(s);
}

// RAII wrappers over the opaque handles.
template <class T, void (*Free)(T*)>
struct Handle {
  T* ptr = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(ptr); }
};
using Config = Handle<ezmfg_config, ezmfg_config_free>;
using Mfg = Handle<ezmfg_mfg, ezmfg_mfg_free>;
using NPlayer = Handle<ezmfg_nplayer, ezmfg_nplayer_free>;
using Report = Handle<ezmfg_report, ezmfg_report_free>;

ezmfg_status load(const Options& o, Config& cfg) {
  ezmfg_overrides ov{};
  if (o.dt) {
    ov.has_dt = 1;
    ov.dt = *o.dt;
  }
  if (o.paths) {
    ov.has_paths = 1;
    ov.paths = *o.paths;
  }
  if (o.seed) {
    ov.has_seed = 1;
    ov.seed = *o.seed;
  }
  ov.eps = o.eps.empty() ? nullptr : o.eps.data();
  ov.n_eps = o.eps.size();
  return ezmfg_config_load(o.config.c_str(), &ov, &cfg.ptr);
}

int run_solve_mfg(const Options& o) {
  Config cfg;
  Mfg eq;
  ezmfg_status s = load(o, cfg);
  if (s == EZMFG_OK) s = ezmfg_mfg_solve(cfg.ptr, &eq.ptr);
  if (s == EZMFG_OK) s = ezmfg_mfg_write_csv(eq.ptr, o.out.c_str());
  if (s == EZMFG_OK) s = ezmfg_write_meta(cfg.ptr, o.out.c_str(), "solve-mfg");
  if (s != EZMFG_OK) return report_error(s);
  std::printf("solved mean-field equilibrium: %zu type(s), %zu grid points -> %s/equilibrium.csv\n",
              ezmfg_mfg_n_types(eq.ptr), ezmfg_mfg_n_points(eq.ptr), o.out.c_str());
  return kExitOk;
}

int run_solve_nplayer(const Options& o) {
  Config cfg;
  NPlayer eq;
  ezmfg_status s = load(o, cfg);
  if (s == EZMFG_OK) s = ezmfg_nplayer_solve(cfg.ptr, &eq.ptr);
  if (s == EZMFG_OK) s = ezmfg_nplayer_write_csv(eq.ptr, o.out.c_str());
  if (s == EZMFG_OK) s = ezmfg_write_meta(cfg.ptr, o.out.c_str(), "solve-nplayer");
  if (s != EZMFG_OK) return report_error(s);
  std::printf("solved %zu-player equilibrium -> %s/nplayer.csv\n", ezmfg_nplayer_n_players(eq.ptr),
              o.out.c_str());
  return kExitOk;
}

int run_verify(const Options& o, const char* check, const char* command, bool with_solutions) {
  Config cfg;
  Mfg eq;
  Report rep;
  ezmfg_status s = load(o, cfg);
  if (s == EZMFG_OK) s = ezmfg_mfg_solve(cfg.ptr, &eq.ptr);
  if (s == EZMFG_OK && with_solutions) {
    s = ezmfg_mfg_write_csv(eq.ptr, o.out.c_str());
    NPlayer np;
    if (s == EZMFG_OK) s = ezmfg_nplayer_solve(cfg.ptr, &np.ptr);
    if (s == EZMFG_OK) s = ezmfg_nplayer_write_csv(np.ptr, o.out.c_str());
  }
  if (s == EZMFG_OK) s = ezmfg_verify(cfg.ptr, eq.ptr, check, &rep.ptr);
  if (s == EZMFG_OK) s = ezmfg_report_write_json(rep.ptr, o.out.c_str());
  if (s == EZMFG_OK) s = ezmfg_write_meta(cfg.ptr, o.out.c_str(), command);
  if (s != EZMFG_OK) return report_error(s);

  for (std::size_t i = 0; i < ezmfg_report_n_checks(rep.ptr); ++i) {
    const char* verdict = ezmfg_report_check_skipped(rep.ptr, i) ? "SKIP"
                          : ezmfg_report_check_passed(rep.ptr, i) ? "PASS"
                                                                  : "FAIL";
    std::printf("%-16s %s  statistic=%.6g  %s\n", ezmfg_report_check_name(rep.ptr, i), verdict,
                ezmfg_report_check_statistic(rep.ptr, i), ezmfg_report_check_detail(rep.ptr, i));
  }
  return ezmfg_report_passed(rep.ptr) ? kExitOk : kExitVerification;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "JSON run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out, "output directory")->capture_default_str();
  cmd->add_option("--dt", o.dt, "grid step; replaces grid.n_cells with T/dt");
  cmd->add_option("--paths", o.paths, "Monte Carlo paths per type");
  cmd->add_option("--seed", o.seed, "simulation seed");
  cmd->add_option("--eps", o.eps, "best-response perturbations")->delimiter(',');
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean-field and N-player Epstein-Zin portfolio games", "ezmfg"};
  app.set_version_flag("--version", std::string(ezmfg_version()));
  app.require_subcommand(1);
  Options o;

  auto* solve_mfg = app.add_subcommand("solve-mfg", "solve the mean-field equilibrium");
  add_common(solve_mfg, o);
  auto* solve_np = app.add_subcommand("solve-nplayer", "solve the N-player equilibrium");
  add_common(solve_np, o);
  auto* verify = app.add_subcommand("verify", "run one verification check");
  verify->add_option("check", o.check, "riccati|fixed-point|best-response|recursion|nplayer-limit|power-reduction")
      ->required()
      ->check(CLI::IsMember({"riccati", "fixed-point", "best-response", "recursion", "nplayer-limit",
                             "power-reduction"}));
  add_common(verify, o);
  auto* report = app.add_subcommand("report", "solve both games and run every check");
  add_common(report, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*solve_mfg) return run_solve_mfg(o);
  if (*solve_np) return run_solve_nplayer(o);
  if (*verify) return run_verify(o, o.check.c_str(), ("verify " + o.check).c_str(), false);
  if (*report) return run_verify(o, "all", "report", true);
  return kExitInternal;
}
