#pragma once

// Front end of the `gaplabel` tool.

#include <ostream>

namespace gaplabel {

enum ExitCode : int {
  exit_ok = 0,
  exit_internal = 1,
  exit_config = 2,
  exit_contradiction = 3,
};

/// Parses the command line, runs one subcommand and returns its exit code.
/// Reports go to `out`, diagnostics to `err`.
auto run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) -> int;

} // namespace gaplabel
