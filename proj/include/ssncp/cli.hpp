#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ssncp {

/// Process exit codes of the command-line tool.
enum ExitCode : int { kExitOptimal = 0, kExitBudget = 1, kExitParse = 2, kExitNumeric = 3 };

/// Runs the tool on argv-style arguments (args[0] is the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ssncp
