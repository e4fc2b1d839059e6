#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mobgap {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitFalsification = 4;

/// Entry point of the `mobgap` tool; args excludes the program name. Reports go to --out,
/// else to the config's `output`, else to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mobgap
