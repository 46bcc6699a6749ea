#pragma once

#include <exception>
#include <ostream>

namespace simpdom {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitDataFormat = 4,
  kExitDivergence = 5,
};

int exit_code_for(const std::exception& e);

// Entry point of the `simpdom` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace simpdom
