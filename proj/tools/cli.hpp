#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cyscm::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 1,
    kCertificationFailure = 2,
    kDivergence = 3,
    kAbductionFailure = 4,
    kTailCheckFailure = 5,
};

// Runs one command line (without the program name). Human-readable output, or
// the JSON report with --json, goes to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cyscm::cli
