#pragma once

// Command-line front end. Subcommands: rate, threshold, sweep, simulate,
// reproduce. Single-result commands print JSON; table commands print CSV
// with '#'-prefixed parameter comments. Exit codes: 0 success, 2
// configuration error, 3 domain error, 4 no threshold in range, 5
// statistical validation failure.

#include <iosfwd>

namespace diqss {

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err);
int run_cli(int argc, const char* const* argv);

} // namespace diqss
