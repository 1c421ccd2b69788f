#pragma once

// Command-line driver. Every command writes a CSV table and a JSON summary
// into the output directory and returns a process exit code:
// 0 ok, 2 usage, 3 validation, 4 resource.

#include <iosfwd>
#include <string>
#include <vector>

namespace rnet::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rnet::cli
