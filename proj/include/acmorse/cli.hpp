/// @file cli.hpp
/// Command-line entry point and the config-to-objects builders it uses.

#pragma once

#include "acmorse/config.hpp"
#include "acmorse/problem.hpp"

namespace acmorse {

/// Grid, metric, potential, and epsilon from a parsed config.
/// Throws std::invalid_argument naming the offending key on bad input.
Problem problem_from_config(const Config& cfg);

/// Initial state per solve.initial.*: a constant, a field file, or a cosine
/// lattice mode with a chosen amplitude.
ScalarField initial_state_from_config(const Config& cfg, const Problem& prob);

/// Runs one subcommand: spectrum | solve | sweep | continue | flow |
/// homology | verify. Exit status 0 on success/PASS, 2 on a verification
/// FAIL or NOT_APPLICABLE verdict, 1 on any error.
int run_command(int argc, const char* const* argv);

}  // namespace acmorse
