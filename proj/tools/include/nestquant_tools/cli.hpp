#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nestquant::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kIoError = 2;
inline constexpr int kConfigError = 3;
inline constexpr int kNumericalError = 4;

/// Runs one `nlq` invocation. args excludes the program name. CSV goes to
/// `out` unless the command was given --out; messages go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nestquant::cli
