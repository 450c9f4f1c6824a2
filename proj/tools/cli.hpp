#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gs1mc::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one command. Returns the process exit code: 0 success, 2 usage,
/// 3 data error, 4 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gs1mc::cli
