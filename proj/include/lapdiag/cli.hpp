#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lapdiag {

/// Entry point of the lapdiag command. Exit codes: 0 success, 1 argument or
/// input errors, 2 numerical failures (diverged mode, degenerate fit).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace lapdiag
