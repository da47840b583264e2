#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace epifamily::cli {

/// Parses `a..b` (inclusive), `a,b,c` or a single seed.
std::vector<std::uint64_t> parse_seeds(std::string_view text);

/// Runs one subcommand; `args` excludes the program name. Returns 0 on
/// success, 2 on invalid input and 3 on numerical failure; errors are written
/// to `err` as one JSON object per line.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_command(int argc, const char* const* argv);

} // namespace epifamily::cli
