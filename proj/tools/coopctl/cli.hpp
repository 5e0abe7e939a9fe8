#pragma once

#include <ostream>

namespace coopctl {

enum ExitStatus : int {
    kOk = 0,
    kValidationFailure = 1,
    kUsageError = 2,
    kNonConvergence = 3,
};

/// Entry point shared by the binary and the tests. Human output goes to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace coopctl
