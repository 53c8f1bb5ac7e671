#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace salab::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInputError = 2,
  kCertificateFailed = 3,
  kEnumerationCap = 4,
  kConditionInfeasible = 5,
};

// Worker count from SA_LAB_THREADS; 1 when unset.
std::size_t threads_from_env();

// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace salab::cli
