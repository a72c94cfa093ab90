#pragma once

#include <string>
#include <vector>

namespace calderon::cli {

/// Runs one CLI invocation (args exclude the program name).
/// Exit codes: 0 success, 1 computation error, 2 configuration error,
/// 3 failed verify criterion.
int run(const std::vector<std::string>& args);

}  // namespace calderon::cli
