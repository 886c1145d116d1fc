#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vscale::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationFailure = 1,
  kNotConverged = 2,
  kUsageError = 3,
};

// args excludes the program name. JSON reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vscale::cli
