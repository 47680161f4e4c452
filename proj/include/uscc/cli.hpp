#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace uscc {

/// `uscc build ...`; `args` excludes the program name. Returns the exit
/// status: 0 success, 1 diagnostics or failed verification, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace uscc
