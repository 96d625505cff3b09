#pragma once

#include <string>
#include <vector>

namespace cgolab {

// Batch driver behind the cgolab executable. Returns the process exit code:
// 0 pass, 1 assertion failure, 2 configuration error.
int cli_run(const std::vector<std::string>& args);

}  // namespace cgolab
