#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace idiombn::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kDiagnostics = 1;
inline constexpr int kUsage = 2;
inline constexpr int kQueryFailure = 3;

// `args` excludes the program name. Results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace idiombn::cli
