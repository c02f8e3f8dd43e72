#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coinflip {

inline constexpr const char* kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Runs the command-line tool. args excludes the program name. Reports go to
/// out, diagnostics to err. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace coinflip
