#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kcsp::cli {

// Stable exit-code contract.
enum ExitCode : int {
  kOk = 0,
  kInfeasible = 1,
  kDegenerateSolve = 2,
  kBadArgs = 3,
  kPartialFailure = 4,
  kCapacity = 5,
};

// Runs one command line (without the program name). Everything the
// commands print goes to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kcsp::cli
