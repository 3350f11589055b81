#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace vxae::cli {

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2, kNumericError = 3 };

// Runs one command line (args[0] is the program name). Normal output goes to `out`,
// usage text and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vxae::cli
