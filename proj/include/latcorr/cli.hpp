#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace latcorr {

inline constexpr const char* kVersion = "1.0.0";

/// Exit codes of run().
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumeric = 2 };

/// Command-line driver. `args` excludes the program name. Data goes to `out`
/// (or the requested file), diagnostics to `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

} // namespace latcorr
