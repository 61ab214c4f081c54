#pragma once

#include <string>
#include <vector>

namespace benlog::cli {

enum ExitCode : int {
  kOk = 0,
  kInconclusive = 1,
  kConfigError = 2,
  kIntegrityFailure = 3,
};

// Runs one command line (args excludes the program name). Prints the
// summary line to stdout and diagnostics to stderr.
int run(const std::vector<std::string>& args);

}  // namespace benlog::cli
