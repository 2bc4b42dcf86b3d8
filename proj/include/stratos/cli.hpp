#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stratos {

/// Runs one CLI invocation. `args` excludes the program name. Returns the
/// process exit code: 0 success, 1 user error, 2 internal error. All output
/// is deterministic; diagnostics go to `err` as single lines.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err);

}  // namespace stratos
