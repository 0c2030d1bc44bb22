#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kanto::cli {

/// Exit codes shared by all subcommands.
enum Exit : int { Ok = 0, Failed = 1, Usage = 2, Inconclusive = 3, Internal = 4 };

/// Runs one command line (without the program name). Data goes to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kanto::cli
