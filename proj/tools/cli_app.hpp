#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cablerender::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNearestFeasible = 2;
inline constexpr int kExitIterationCap = 3;

/// Runs the command line `args` (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cablerender::cli
