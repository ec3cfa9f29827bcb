#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace irtmpt::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kGenerationFailed = 2,
  kInternalError = 3,
  kUsage = 64,
  kDataFormat = 65,
  kUnexpected = 70,
};

/// Runs one invocation; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace irtmpt::cli
