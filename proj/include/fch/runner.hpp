#pragma once

#include "fch/config.hpp"
#include "fch/energy.hpp"
#include "fch/evolution.hpp"

#include <string>

namespace fch {

[[nodiscard]] Potential build_potential(const RunConfig& cfg);
[[nodiscard]] EnergyContext build_context(const RunConfig& cfg);
[[nodiscard]] FemVector initial_state(const RunConfig& cfg, const FracMesh& mesh);
[[nodiscard]] StepConfig step_config(const RunConfig& cfg);

/// Each command writes into cfg.output.dir and returns the exit status. Library
/// errors propagate as exceptions carrying their own exit codes.
///   simulate:    trajectory.csv, certificates.csv, final_state.csv, simulate.json
///   equilibrium: equilibrium.json
///   verify:      verify.json (exit 5 when any check fails)
///   spectrum:    spectrum.csv, stiffness_s.bin
///   rates:       rates.json, rates_fit.csv (needs trajectory.csv and equilibrium.json)
int run_simulate(const RunConfig& cfg);
int run_equilibrium(const RunConfig& cfg);
int run_verify(const RunConfig& cfg);
int run_spectrum(const RunConfig& cfg);
int run_rates(const RunConfig& cfg);

/// Dispatches on the subcommand name; throws ConfigError for unknown names.
int run_command(const std::string& name, const RunConfig& cfg);

} // namespace fch
