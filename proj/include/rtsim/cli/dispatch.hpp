#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rtsim/cli/config.hpp"
#include "rtsim/cli/io.hpp"
#include "rtsim/internal_models.hpp"
#include "rtsim/oracle.hpp"
#include "rtsim/particle_sim.hpp"
#include "rtsim/scaling.hpp"

namespace rtsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitClamp = 3;

TwoStateParams two_state_params(const Config& config);
OneStateParams one_state_params(const Config& config);
/// Includes the resolved observation grid.
IbmParams ibm_params(const Config& config);

/// Runs one subcommand with a resolved configuration and returns the exit
/// status. Progress goes to `log`.
int dispatch(const std::string& subcommand, const Config& config, std::ostream& log);

/// Full command-line entry point (argument parsing, error reporting).
int run_cli(int argc, const char* const* argv);

}  // namespace rtsim::cli
