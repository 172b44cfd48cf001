#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deceptive {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitInfeasible = 2,
    kExitNumeric = 3,
};

/// Entry point for the `deceptive_planner` tool. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace deceptive
