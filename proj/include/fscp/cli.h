// Command-line front end: gen, solve, compare.

#ifndef FSCP_CLI_H_
#define FSCP_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace fscp {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInvalidModel = 2,
  kExitInfeasible = 3,
  kExitInconsistent = 4,
  kExitTimeout = 5,
};

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Shortest round-trip decimal form.
std::string format_value(double value);

}  // namespace fscp

#endif  // FSCP_CLI_H_
