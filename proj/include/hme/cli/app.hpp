#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hme::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitNumeric = 3;

// Runs the `hme` command line. Errors are reported on `err` as
// "error:<kind>: <message>" with kind one of usage, config, input, numeric,
// internal.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace hme::cli
