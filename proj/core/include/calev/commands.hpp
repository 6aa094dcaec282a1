#pragma once

#include <string>
#include <vector>

namespace calev {

// Full CLI driver: parses argv, runs the subcommand, maps Error kinds to
// exit codes (0 success, 1 usage, 2 validation, 3 alignment, 4 computation).
// Reports go to files; summaries to stdout; diagnostics to stderr.
int run_cli(int argc, const char* const* argv);

// Same driver for in-process callers; args exclude the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace calev
