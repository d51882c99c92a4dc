#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace heis::cli {

/// Runs one subcommand. args excludes the program name. Returns the exit
/// code: 0 ok, 2 invalid input or coverage, 3 convergence or resources.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace heis::cli
