#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dqpgo::cli {

// Exit codes
inline constexpr int kOk = 0;
inline constexpr int kSolverFailure = 1;
inline constexpr int kInputError = 2;

/// Runs the command line `args` (args[0] is the program name). Normal
/// output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Help text of one subcommand ("" for the top level).
std::string helpText(const std::string& subcommand);

}  // namespace dqpgo::cli
