#pragma once

// Command-line front end. Exit codes: 0 success, 1 domain violation,
// 2 input or parse error, 3 numerical non-convergence.

#include <ostream>
#include <string>
#include <vector>

namespace itmdp {

inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { exit_ok = 0, exit_domain = 1, exit_input = 2, exit_nonconvergence = 3 };

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

/// Same as above; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace itmdp
