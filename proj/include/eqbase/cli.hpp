#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eqbase {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,
    kExitRuntime = 3,
};

/// Entry point of the `eqbase` tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eqbase
