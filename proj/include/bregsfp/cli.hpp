#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bregsfp::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kNotConverged = 2;
inline constexpr int kRunError = 3;
inline constexpr int kAllCellsFailed = 4;
inline constexpr int kGoldenMismatch = 5;

/// Entry point behind the bregsfp executable. args excludes the program
/// name: {"solve", "--example", "1", ...}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bregsfp::cli
