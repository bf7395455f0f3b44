#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hcm::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInternalError = 1,
  kUsageError = 2,
  kDataError = 3,
};

// Runs one invocation; `args` excludes the program name. Diagnostics go to
// `err`, progress and summaries to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hcm::cli
