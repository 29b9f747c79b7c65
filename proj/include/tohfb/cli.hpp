#pragma once
// The tohfb command line: solve, simulate, irl, fit-models, stats, serve.

#include <iosfwd>
#include <string>
#include <vector>

namespace tohfb::cli {

/// args excludes the program name. Exit status: 0 on success, 2 on usage
/// errors, 1 on any other reported error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Expands `--config file.json` into flags that the command line does not
/// already set. Throws ParseError.
std::vector<std::string> expand_config(const std::vector<std::string>& args);

}  // namespace tohfb::cli
