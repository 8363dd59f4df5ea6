#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tensorreg {

// Exit codes of the command line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;     // unexpected exception
inline constexpr int kExitValidation = 2;  // bad arguments, configs or data
inline constexpr int kExitNoConvergence = 3;

// Runs the tool on `args` (without the program name). Reports go to `out`
// unless --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tensorreg
