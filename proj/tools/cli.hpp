#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace steerlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;

/// Environment variable holding the default worker count.
inline constexpr const char* kWorkersEnv = "STEERLAB_WORKERS";

/// Runs one command line (without the program name). Results go to `out`
/// unless --out names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace steerlab::cli
