#pragma once

#include <string>
#include <vector>

namespace rbdsde::cli {

/// Parses argv, runs the chosen subcommand and returns the process exit
/// status: 0 on success, 2 on invalid input, 3 on numerical failure.
int run(const std::vector<std::string>& args);

}  // namespace rbdsde::cli
