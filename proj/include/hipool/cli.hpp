#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hipool::cli {

enum ExitCode : int {
  kSuccess = 0,
  kCheckFailed = 1,
  kUsageError = 2,
  kNumericError = 3,
};

// Runs one command line (args[0] is the program name) and returns the exit code.
// Subcommands: stats | split | synth | train | eval | gradcheck | ablate-length.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hipool::cli
