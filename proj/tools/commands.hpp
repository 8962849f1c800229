#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace covrecon::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitIo = 2;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "COVRECON_OUT_DIR";

/// Runs the command line `args` (args[0] is the program name). Normal output
/// goes to `out`, diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace covrecon::cli
