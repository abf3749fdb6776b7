#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace grn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitRunFailure = 2;

/// Entry point of grn-bench. Subcommands: run, gamma-probe, inexactness, predict, gen-data.
int cli_main(int argc, char** argv);
/// Same with explicit arguments (args[0] is the program name) and streams.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace grn
