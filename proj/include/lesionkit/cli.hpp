#pragma once

#include <string>
#include <vector>

namespace lesion::cli {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

/// Runs one command line (args[0] is the program name). Output files go
/// below --out-dir; progress and per-image failures go to stderr.
int run_command(const std::vector<std::string>& args);

}  // namespace lesion::cli
