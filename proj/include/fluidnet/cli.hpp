#pragma once

#include <string>
#include <vector>

namespace fluidnet {

// Exit codes: 0 success, 1 comparison failure, 2 usage error, 3 malformed
// config, 4 dimension mismatch, 5 evaluation error.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace fluidnet
