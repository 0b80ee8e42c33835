#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hyzeno::cli {

enum ExitCode : int {
  kOk = 0,
  kSpecError = 1,
  kInvalidX0 = 2,
  kRuntimeError = 3,
  kBudgetExceeded = 4,
  kCheckFailed = 5,
};

/// Runs the command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hyzeno::cli
