#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gctune {

inline constexpr const char* kVersion = "1.0.0";

// Stable process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitEvaluator = 3 };

// Runs one subcommand. `args` excludes the program name. Never throws; errors
// are written to `err` and mapped onto ExitCode.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gctune
