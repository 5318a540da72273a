#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace saturn::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUnresolved = 2;  // timeout, step limit, gave up

/// Runs the tool with `args` (without the program name). Output and diagnostics go
/// to the given streams, so tests can drive it in-process.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace saturn::cli
