#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iwagg::cli {

/// Exit codes: 0 success, 2 input/config error, 3 numerical error, 4 I/O error.
constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

/// Runs one invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iwagg::cli
