#include "ezmfg/ezmfg.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "config.hpp"
#include "mfg_solver.hpp"
#include "nplayer_solver.hpp"
#include "ode.hpp"
#include "output.hpp"
#include "utility.hpp"
#include "verify.hpp"

struct ezmfg_config {
  ezmfg::RunConfig config;
};
struct ezmfg_mfg {
  ezmfg::MfgEquilibrium eq;
};
struct ezmfg_nplayer {
  ezmfg::NPlayerEquilibrium eq;
};
struct ezmfg_report {
  ezmfg::SimulationReport report;
};

namespace {

thread_local std::string g_last_error;

ezmfg_status fail(ezmfg_status status, const std::string& message) {
  g_last_error = message;
  return status;
}

// Maps exceptions escaping the core onto status codes.
template <class F>
ezmfg_status guarded(F&& body) {
  try {
    return body();
  } catch (const ezmfg::ConfigError& e) {
    return fail(EZMFG_E_CONFIG, e.what());
  } catch (const ezmfg::NotApplicable& e) {
    return fail(EZMFG_E_NOT_APPLICABLE, e.what());
  } catch (const ezmfg::DomainError& e) {
    return fail(EZMFG_E_NUMERICAL, e.what());
  } catch (const ezmfg::ode::BlowUp& e) {
    return fail(EZMFG_E_NUMERICAL, e.what());
  } catch (const std::domain_error& e) {
    return fail(EZMFG_E_NUMERICAL, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(EZMFG_E_ARGUMENT, e.what());
  } catch (const std::out_of_range& e) {
    return fail(EZMFG_E_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(EZMFG_E_INTERNAL, e.what());
  } catch (...) {
    return fail(EZMFG_E_INTERNAL, "unknown error");
  }
}

ezmfg::ConfigOverrides to_overrides(const ezmfg_overrides* o) {
  ezmfg::ConfigOverrides out;
  if (!o) return out;
  if (o->has_dt) out.dt = o->dt;
  if (o->has_paths) out.paths = static_cast<std::size_t>(o->paths);
  if (o->has_seed) out.seed = o->seed;
  if (o->eps && o->n_eps > 0) out.eps = std::vector<double>(o->eps, o->eps + o->n_eps);
  return out;
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define EZMFG_REQUIRE(cond, what) \
  if (!(cond)) return fail(EZMFG_E_ARGUMENT, what)

}  // namespace

extern "C" {

const char* ezmfg_version(void) { return ezmfg::kVersion; }

const char* ezmfg_last_error(void) { return g_last_error.c_str(); }

const char* ezmfg_status_name(ezmfg_status status) {
  switch (status) {
    case EZMFG_OK: return "ok";
    case EZMFG_E_ARGUMENT: return "invalid argument";
    case EZMFG_E_CONFIG: return "config error";
    case EZMFG_E_VALIDATION: return "validation error";
    case EZMFG_E_NOT_APPLICABLE: return "not applicable";
    case EZMFG_E_NUMERICAL: return "numerical error";
    case EZMFG_E_IO: return "i/o error";
    case EZMFG_E_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void ezmfg_string_free(char* s) { std::free(s); }

ezmfg_status ezmfg_config_load(const char* path, const ezmfg_overrides* overrides, ezmfg_config** out) {
  EZMFG_REQUIRE(path && out, "ezmfg_config_load: null argument");
  return guarded([&] {
    *out = new ezmfg_config{ezmfg::load_config(path, to_overrides(overrides))};
    return EZMFG_OK;
  });
}

ezmfg_status ezmfg_config_parse(const char* text, const ezmfg_overrides* overrides, ezmfg_config** out) {
  EZMFG_REQUIRE(text && out, "ezmfg_config_parse: null argument");
  return guarded([&] {
    *out = new ezmfg_config{ezmfg::parse_config_text(text, to_overrides(overrides))};
    return EZMFG_OK;
  });
}

void ezmfg_config_free(ezmfg_config* config) { delete config; }

ezmfg_status ezmfg_config_to_json(const ezmfg_config* config, char** out) {
  EZMFG_REQUIRE(config && out, "ezmfg_config_to_json: null argument");
  return guarded([&] {
    *out = copy_string(ezmfg::to_json_text(config->config));
    return EZMFG_OK;
  });
}

ezmfg_status ezmfg_config_validate(const ezmfg_config* config) {
  EZMFG_REQUIRE(config, "ezmfg_config_validate: null config");
  return guarded([&] {
    const auto v = ezmfg::validate(config->config.population, config->config.regime);
    return v.ok() ? EZMFG_OK : fail(EZMFG_E_VALIDATION, v.summary());
  });
}

ezmfg_status ezmfg_config_validate_nplayer(const ezmfg_config* config) {
  EZMFG_REQUIRE(config, "ezmfg_config_validate_nplayer: null config");
  return guarded([&] {
    const auto v = ezmfg::validate(config->config.nplayer_game(), config->config.regime);
    return v.ok() ? EZMFG_OK : fail(EZMFG_E_VALIDATION, v.summary());
  });
}

size_t ezmfg_config_n_types(const ezmfg_config* config) { return config ? config->config.population.size() : 0; }

uint64_t ezmfg_config_seed(const ezmfg_config* config) { return config ? config->config.sim.seed : 0; }

ezmfg_status ezmfg_write_meta(const ezmfg_config* config, const char* dir, const char* command) {
  EZMFG_REQUIRE(config && dir, "ezmfg_write_meta: null argument");
  return guarded([&] {
    try {
      ezmfg::write_file(dir, "meta.json", ezmfg::meta_json(config->config, command ? command : "").dump(2) + "\n");
    } catch (const std::runtime_error& e) {
      return fail(EZMFG_E_IO, e.what());
    }
    return EZMFG_OK;
  });
}

ezmfg_status ezmfg_mfg_solve(const ezmfg_config* config, ezmfg_mfg** out) {
  EZMFG_REQUIRE(config && out, "ezmfg_mfg_solve: null argument");
  const ezmfg_status valid = ezmfg_config_validate(config);
  if (valid != EZMFG_OK) return valid;
  return guarded([&] {
    *out = new ezmfg_mfg{ezmfg::solve_mfg(config->config.population)};
    return EZMFG_OK;
  });
}

void ezmfg_mfg_free(ezmfg_mfg* eq) { delete eq; }

size_t ezmfg_mfg_n_types(const ezmfg_mfg* eq) { return eq ? eq->eq.n_types() : 0; }

size_t ezmfg_mfg_n_points(const ezmfg_mfg* eq) { return eq ? eq->eq.grid().n_points() : 0; }

ezmfg_status ezmfg_mfg_point(const ezmfg_mfg* eq, size_t type, size_t point, double* t, double* pi_star,
                             double* c_star, double* z0, double* y_tilde) {
  EZMFG_REQUIRE(eq, "ezmfg_mfg_point: null equilibrium");
  EZMFG_REQUIRE(type < eq->eq.n_types() && point < eq->eq.grid().n_points(), "ezmfg_mfg_point: index out of range");
  const auto& e = eq->eq;
  const std::size_t cell = std::min(point, e.grid().n_cells() - 1);
  if (t) *t = e.grid()[point];
  if (pi_star) *pi_star = e.pi_star[type][cell];
  if (c_star) *c_star = e.c_star[type][point];
  if (z0) *z0 = e.Z0[type][cell];
  if (y_tilde) *y_tilde = e.Y_tilde[type][point];
  return EZMFG_OK;
}

ezmfg_status ezmfg_mfg_riccati(const ezmfg_mfg* eq, size_t type, size_t cell, double* a, double* b, double* d) {
  EZMFG_REQUIRE(eq, "ezmfg_mfg_riccati: null equilibrium");
  EZMFG_REQUIRE(type < eq->eq.n_types() && cell < eq->eq.grid().n_cells(), "ezmfg_mfg_riccati: index out of range");
  if (a) *a = eq->eq.riccati.A[type][cell];
  if (b) *b = eq->eq.riccati.B[type][cell];
  if (d) *d = eq->eq.riccati.D[type];
  return EZMFG_OK;
}

ezmfg_status ezmfg_mfg_write_csv(const ezmfg_mfg* eq, const char* dir) {
  EZMFG_REQUIRE(eq && dir, "ezmfg_mfg_write_csv: null argument");
  return guarded([&] {
    try {
      ezmfg::write_file(dir, "equilibrium.csv", ezmfg::equilibrium_csv(eq->eq));
    } catch (const std::runtime_error& e) {
      return fail(EZMFG_E_IO, e.what());
    }
    return EZMFG_OK;
  });
}

ezmfg_status ezmfg_nplayer_solve(const ezmfg_config* config, ezmfg_nplayer** out) {
  EZMFG_REQUIRE(config && out, "ezmfg_nplayer_solve: null argument");
  const ezmfg_status valid = ezmfg_config_validate_nplayer(config);
  if (valid != EZMFG_OK) return valid;
  return guarded([&] {
    *out = new ezmfg_nplayer{ezmfg::solve_nplayer(config->config.nplayer_game())};
    return EZMFG_OK;
  });
}

void ezmfg_nplayer_free(ezmfg_nplayer* eq) { delete eq; }

size_t ezmfg_nplayer_n_players(const ezmfg_nplayer* eq) { return eq ? eq->eq.size() : 0; }

ezmfg_status ezmfg_nplayer_point(const ezmfg_nplayer* eq, size_t player, size_t point, double* t, double* pi,
                                 double* c, double* zi0) {
  EZMFG_REQUIRE(eq, "ezmfg_nplayer_point: null equilibrium");
  EZMFG_REQUIRE(player < eq->eq.size() && point < eq->eq.grid().n_points(),
                "ezmfg_nplayer_point: index out of range");
  const auto& e = eq->eq;
  const std::size_t cell = std::min(point, e.grid().n_cells() - 1);
  if (t) *t = e.grid()[point];
  if (pi) *pi = e.pi[player][cell];
  if (c) *c = e.c[player][point];
  if (zi0) *zi0 = e.Zi0[player][cell];
  return EZMFG_OK;
}

ezmfg_status ezmfg_nplayer_write_csv(const ezmfg_nplayer* eq, const char* dir) {
  EZMFG_REQUIRE(eq && dir, "ezmfg_nplayer_write_csv: null argument");
  return guarded([&] {
    try {
      ezmfg::write_file(dir, "nplayer.csv", ezmfg::nplayer_csv(eq->eq));
    } catch (const std::runtime_error& e) {
      return fail(EZMFG_E_IO, e.what());
    }
    return EZMFG_OK;
  });
}

ezmfg_status ezmfg_verify(const ezmfg_config* config, const ezmfg_mfg* eq, const char* check,
                          ezmfg_report** out) {
  EZMFG_REQUIRE(config && eq && check && out, "ezmfg_verify: null argument");
  const std::string name = check;
  if (name == "all") {
    return guarded([&] {
      *out = new ezmfg_report{ezmfg::run_report(config->config, eq->eq)};
      return EZMFG_OK;
    });
  }
  const auto kind = ezmfg::parse_check(name);
  if (!kind) return fail(EZMFG_E_ARGUMENT, "unknown check '" + name + "'");
  return guarded([&] {
    ezmfg::SimulationReport rep;
    rep.checks.push_back(ezmfg::run_check(*kind, config->config, eq->eq));
    *out = new ezmfg_report{std::move(rep)};
    return EZMFG_OK;
  });
}

void ezmfg_report_free(ezmfg_report* report) { delete report; }

int ezmfg_report_passed(const ezmfg_report* report) { return report && report->report.all_pass() ? 1 : 0; }

size_t ezmfg_report_n_checks(const ezmfg_report* report) { return report ? report->report.checks.size() : 0; }

const char* ezmfg_report_check_name(const ezmfg_report* report, size_t i) {
  return report && i < report->report.checks.size() ? report->report.checks[i].name.c_str() : nullptr;
}

int ezmfg_report_check_passed(const ezmfg_report* report, size_t i) {
  return report && i < report->report.checks.size() && report->report.checks[i].pass ? 1 : 0;
}

int ezmfg_report_check_skipped(const ezmfg_report* report, size_t i) {
  return report && i < report->report.checks.size() && report->report.checks[i].skipped ? 1 : 0;
}

double ezmfg_report_check_statistic(const ezmfg_report* report, size_t i) {
  return report && i < report->report.checks.size() ? report->report.checks[i].statistic : 0.0;
}

const char* ezmfg_report_check_detail(const ezmfg_report* report, size_t i) {
  return report && i < report->report.checks.size() ? report->report.checks[i].detail.c_str() : nullptr;
}

ezmfg_status ezmfg_report_to_json(const ezmfg_report* report, char** out) {
  EZMFG_REQUIRE(report && out, "ezmfg_report_to_json: null argument");
  return guarded([&] {
    *out = copy_string(ezmfg::report_json(report->report).dump(2));
    return EZMFG_OK;
  });
}

ezmfg_status ezmfg_report_write_json(const ezmfg_report* report, const char* dir) {
  EZMFG_REQUIRE(report && dir, "ezmfg_report_write_json: null argument");
  return guarded([&] {
    try {
      ezmfg::write_file(dir, "verify.json", ezmfg::report_json(report->report).dump(2) + "\n");
    } catch (const std::runtime_error& e) {
      return fail(EZMFG_E_IO, e.what());
    }
    return EZMFG_OK;
  });
}

}  // extern "C"
