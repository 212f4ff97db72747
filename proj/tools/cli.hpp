#pragma once

#include <ostream>

namespace lexcraft::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kValidation = 2,
    kIo = 3,
    kBackend = 4,
};

/// Entry point for the `lexcraft` binary; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace lexcraft::cli
