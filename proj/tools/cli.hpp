#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qg::cli {

// Runs the command line (args excludes the program name). Returns the exit code:
// 0 success, 2 input error, 3 hard-assertion failure, 4 solver failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qg::cli
