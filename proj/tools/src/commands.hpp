#pragma once

#include <ostream>

namespace loglindley::cli {

enum ExitCode : int { ok = 0, failure = 1, input_error = 2, convergence_failure = 3 };

/// Entry point of the `loglindley` tool. Reports go to `out` (or to --out
/// files), diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace loglindley::cli
