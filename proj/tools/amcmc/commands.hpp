#pragma once

#include <string>

#include "config.hpp"

namespace amcmc::cli {

/// Process exit codes.
inline constexpr int kExitPass = 0;
inline constexpr int kExitUnexpected = 1;
inline constexpr int kExitExpectedFailure = 2;

struct CommandResult {
  /// RunRecord: config hash, timestamps, artifacts, metrics, checks.
  json record;
  int exit_code = kExitPass;
};

CommandResult cmd_counterexample(const RunConfig& cfg);
CommandResult cmd_lln(const RunConfig& cfg);
CommandResult cmd_clt(const RunConfig& cfg);
CommandResult cmd_bounds(const RunConfig& cfg);
CommandResult cmd_waning(const RunConfig& cfg);
CommandResult cmd_poisson(const RunConfig& cfg);
CommandResult cmd_kernel_info(const RunConfig& cfg);

/// Dispatches on the subcommand name.
CommandResult run_command(const std::string& name, const RunConfig& cfg);

}  // namespace amcmc::cli
