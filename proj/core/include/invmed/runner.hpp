#pragma once

#include <string>

#include "invmed/config.hpp"

namespace invmed {

/// Exit status categories of a CLI run.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,   ///< config / argument errors
  kExitSolver = 2,  ///< singularity, non-convergence, degenerate weights
  kExitIo = 3,      ///< file-system failures
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string summary;  ///< one-paragraph outcome, also written to the manifest
};

/// Executes the configured command, writing all artifacts plus a manifest
/// and the resolved config echo into cfg.out.  Errors are mapped to exit
/// categories and recorded in the manifest instead of propagating.
RunOutcome run(const RunConfig& cfg);

}  // namespace invmed
