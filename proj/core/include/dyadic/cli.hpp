#pragma once

#include <string>
#include <vector>

namespace dyadic {

// Parses and executes one command line (argv without the program name).
// Returns the process exit code: 0 when every hard check passes, 2 when a
// check fails or an input is unusable, CLI11's own codes for usage errors.
int run(const std::vector<std::string>& args);

} // namespace dyadic
