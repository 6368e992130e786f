#pragma once

#include <iosfwd>

namespace iar {

/// Command-line entry point with subcommands train, synth, convert and audit.
/// Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace iar
