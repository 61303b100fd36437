#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chainbinom {

inline constexpr const char* kVersion = "0.1.0";

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNumerical = 3,
};

/// Runs one `chainbinom` subcommand. `args` excludes the program name.
/// Results go to `out`; diagnostics only to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace chainbinom
