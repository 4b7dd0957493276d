#ifndef FRESH_TOOLS_COMMANDS_HPP
#define FRESH_TOOLS_COMMANDS_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace fresh::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kIoError = 3,
    kInternalError = 4,
};

/// Runs the command line `args` (args[0] is the program name), writing human
/// readable output to `out` and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fresh::cli

#endif
