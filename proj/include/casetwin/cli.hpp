#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace casetwin {

/// Exit codes: 0 success, 1 usage or model/domain error, 2 I/O error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace casetwin
