#ifndef GOALSKIT_TOOLS_CLI_HPP
#define GOALSKIT_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace goalskit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// Runs the command line; returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace goalskit::cli

#endif  // GOALSKIT_TOOLS_CLI_HPP
