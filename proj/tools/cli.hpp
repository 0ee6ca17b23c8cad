#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace boltrot::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kIoError = 3,
  kEvaluationUndefined = 4,
};

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace boltrot::cli
