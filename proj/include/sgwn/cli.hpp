#pragma once

namespace sgwn::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kConfigError = 2,
  kMissingInput = 3,
  kNumericalFailure = 4,
};

int run(int argc, char** argv);

}  // namespace sgwn::cli
