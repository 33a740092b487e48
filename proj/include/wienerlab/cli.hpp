#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace wienerlab {

/// Runs one command line (without the program name). Exit codes: 0 success,
/// 2 validation error, 3 numerical fault.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, char** argv);

}  // namespace wienerlab
