#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lexsimp/error.hpp"

namespace lexsimp::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kMissingResource = 3,
  kSchemaMismatch = 4,
  kParseError = 5,
  kNumericError = 6,
};

int exit_code(ErrorCode code);

/// Runs one invocation (args excludes the program name). Results go to
/// `out`, usage and the one-line error report to `err`; logging goes to
/// standard error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lexsimp::cli
