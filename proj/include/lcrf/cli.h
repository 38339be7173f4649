// Command-line workflows: train, extract, lifelong, eval.

#ifndef LCRF_CLI_H_
#define LCRF_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace lcrf {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInputError = 2,
  kExitFormatError = 3,
  kExitNotConverged = 4,  // only with --strict
  kExitRuntimeError = 5,
};

// Runs one subcommand. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lcrf

#endif  // LCRF_CLI_H_
