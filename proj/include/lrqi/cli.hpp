#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lrqi {

/// Runs one command (`generate`, `fit`, `compare` or `export`). `args` excludes the program
/// name. Returns 0 on success, 2 on a usage error and 1 on any runtime failure.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lrqi
