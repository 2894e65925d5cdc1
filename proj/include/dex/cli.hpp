#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace dex::cli {

/// Exit codes: 0 success, 1 infeasible / failed / not converged, 2 usage or
/// malformed input. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dex::cli
