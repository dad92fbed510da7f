#pragma once

namespace tactsim::cli {

/// Parses argv and runs the selected subcommand.
/// Exit codes: 0 success, 1 computation/validation error, 2 usage or I/O
/// error (bad flags, unreadable/malformed files, network failures).
int run_cli(int argc, const char* const* argv);

}  // namespace tactsim::cli
