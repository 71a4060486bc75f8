#pragma once

#include <string>
#include <vector>

namespace cookar::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Runs the command line (args excludes the program name). Returns the
/// process exit code: 0 success, 1 usage error, 2 runtime error.
int dispatch(const std::vector<std::string>& args);
int dispatch(int argc, const char* const* argv);

}  // namespace cookar::cli
