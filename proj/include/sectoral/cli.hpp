#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sectoral::cli {

/// Exit codes: 0 success, 1 ran but no fit was accepted, 2 usage or I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitNoneAccepted = 1;
inline constexpr int kExitUsage = 2;

/// Runs one invocation. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sectoral::cli
