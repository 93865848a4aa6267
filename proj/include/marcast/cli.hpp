#pragma once

#include <iosfwd>

namespace marcast::cli {

enum ExitCode : int { Success = 0, Usage = 2, Data = 3, Numerical = 4 };

/// Parse arguments and run one subcommand. Output files are written where the
/// command's --output prefix points; progress and errors go to `out` / `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace marcast::cli
