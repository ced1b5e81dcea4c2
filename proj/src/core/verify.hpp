#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "config.hpp"
#include "mfg_solver.hpp"
#include "simulate.hpp"

namespace ezmfg {

enum class CheckKind { Riccati, FixedPoint, BestResponse, Recursion, NPlayerLimit, PowerReduction };

const char* to_string(CheckKind kind);
std::optional<CheckKind> parse_check(const std::string& name);
std::vector<CheckKind> all_checks();

/// The requested check cannot run on this configuration.
class NotApplicable : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Closed-form consumption against RK4, plus the finite-difference residual
/// of y' = y^2 + B y at cell midpoints, for every type. Tolerance 1e-6.
CheckResult verify_riccati(const MfgEquilibrium& eq);

/// Per type: |MC estimate - V0| <= 3 SE, or <= 1e-6 without any noise.
CheckResult verify_recursion(const MfgEquilibrium& eq, const SimConfig& sim);

/// Per type, N-player games of i.i.d. copies against the mean-field limit.
CheckResult verify_nplayer_limit(const MfgEquilibrium& eq, const std::vector<std::size_t>& ns);

/// Requires psi * gamma = 1 for every type; throws NotApplicable otherwise.
CheckResult verify_power_reduction(const MfgEquilibrium& eq);

/// Best-response gaps for every type.
CheckResult verify_best_response(const MfgEquilibrium& eq, const std::vector<double>& eps);

CheckResult run_check(CheckKind kind, const RunConfig& config, const MfgEquilibrium& eq);

/// Every check; a check that does not apply is recorded as skipped (pass, with
/// the reason in its detail).
SimulationReport run_report(const RunConfig& config, const MfgEquilibrium& eq);

}  // namespace ezmfg
