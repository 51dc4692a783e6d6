#pragma once

#include <iosfwd>

namespace occdet {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2 };

/// Entry point of the `occdet` tool. Subcommands: gen, assign, check-grad,
/// train-toy, ablate, nms, eval, refine. Returns 0 on success, 1 on a usage
/// error and 2 on a data or computation error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace occdet
