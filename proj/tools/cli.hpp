#pragma once

#include <string>
#include <vector>

namespace eventcast::cli {

/// Dispatches one subcommand. Returns the process exit code:
/// 0 ok, 1 usage / unknown command, 2 config error, 3 data error,
/// 4 backend or network error.
int run(const std::vector<std::string>& args);

}  // namespace eventcast::cli
