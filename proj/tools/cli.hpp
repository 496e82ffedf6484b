#pragma once

#include <iosfwd>

namespace strata {

/// Parses argv and runs one subcommand. Exit codes: 0 success, 2 config or
/// validation error, 3 estimator degeneracy, 1 anything else.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace strata
