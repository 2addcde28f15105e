#pragma once

#include <string>
#include <vector>

namespace a2f::cli {

// Exit codes: 0 success, 1 unexpected failure, 2 usage or configuration
// error, 3 data / schema / checkpoint error, 4 training divergence.
int run_command(const std::vector<std::string>& args);
int run_command(int argc, char** argv);

}  // namespace a2f::cli
