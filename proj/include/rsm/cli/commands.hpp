#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rsm/cli/config.hpp"

namespace rsm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Trajectories of both systems for every initial value:
/// full_<i>.csv, reduced_<i>.csv, manifest.json (and path.csv on request).
void cmd_simulate(RunConfig const& cfg, std::ostream& log);

/// bifurcation.json, bifurcation.csv, manifest.json.
void cmd_sweep(RunConfig const& cfg, std::ostream& log);

/// manifold.csv with xi,h0,h1,oracle on the configured xi grid.
void cmd_manifold(RunConfig const& cfg, std::ostream& log);

/// oracle.csv: max |h1 - oracle| over the xi grid for each eps, plus the
/// fitted convergence order in manifest.json.
void cmd_oracle(RunConfig const& cfg, std::ostream& log);

/// lift.json and lift.csv for the configured a and perturbation.
void cmd_verify_lift(RunConfig const& cfg, std::ostream& log);

std::vector<std::string> command_names();

/// Runs a command and maps failures onto exit codes: configuration and
/// output-directory problems give 2, numerical failures give 3.
int run_command(std::string const& name, RunConfig const& cfg, std::ostream& log,
                std::ostream& err);

}  // namespace rsm::cli
