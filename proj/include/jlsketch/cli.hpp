#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jlsketch::cli {

enum ExitCode : int { kSuccess = 0, kRuntimeError = 1, kUsageError = 2, kViolation = 3 };

/// Parses argv (argv[0] is the program name), runs the subcommand and returns its exit code:
/// 0 success, 1 runtime error, 2 argument error, 3 a verification found a bound violation.
int parse_and_dispatch(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);
int parse_and_dispatch(int argc, const char* const* argv);

}  // namespace jlsketch::cli
