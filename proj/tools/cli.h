// cli.h - command-line front end, callable in-process for tests
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace coh::cli {

/// Runs one invocation. `args` excludes the program name. Returns the exit
/// code: 0 success, 2 parse, 3 capacity, 4 insufficient data, 5 I/O, 1 other.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace coh::cli
