#pragma once

#include <string>
#include <vector>

namespace lpinfer::cli {

/// Exit codes: 0 success, 1 usage or input error, 2 numerical failure.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace lpinfer::cli
