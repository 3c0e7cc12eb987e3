#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace geome::cli {

// Runs one command line (without the program name). Returns the process
// exit status: 0 on success, 2 on usage errors, 1 on runtime errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace geome::cli
