#pragma once

#include <iosfwd>

namespace ofdm {

// Entry point behind the ofdm-lab binary. Exit codes: 0 success, 2 config or
// I/O error, 3 infeasible parameters, 4 failed --check gate.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace ofdm
