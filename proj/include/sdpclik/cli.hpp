#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sdpclik {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitAbort = 3,
};

/// Entry point behind the `sdpclik` executable. `args` excludes the program
/// name. Subcommands: run, sweep, validate, export-sdp.
///
/// SDPCLIK_FEAS_TOL, SDPCLIK_OBJ_TOL and SDPCLIK_MAX_ITERATIONS override the
/// solver settings of whatever scenario is loaded.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdpclik
