#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace finetti::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2 };

/// Runs one command line (args excludes the program name). Reports go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace finetti::cli
