#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lordd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitError = 2;

// Entry point shared by the lordd binary and the tests. args excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lordd::cli
