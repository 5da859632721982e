#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace detfactor {

// Entry point for the command line tool. args excludes the program name.
// Returns the process exit code: 0 ok, 1 runtime failure, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace detfactor
