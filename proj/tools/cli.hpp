#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace symstat::cli {

enum ExitCode { kOk = 0, kUsage = 2, kInternal = 3, kNotConverged = 4 };

/// Runs one subcommand; argv excludes the program name. Output goes to
/// `out`, diagnostics to `err`. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace symstat::cli
