#pragma once

#include <iosfwd>

namespace scoregraph {

/// Parses argv and runs one subcommand. Returns 0 on success, 2 on a usage or
/// validation error and 1 on a runtime failure.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace scoregraph
