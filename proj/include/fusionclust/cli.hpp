#pragma once

#include <string>
#include <vector>

namespace fusionclust::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns one of the exit codes above.
int run(const std::vector<std::string>& args);

/// Splits "a:b:step" (inclusive, step > 0) or "v1,v2,..." into values.
std::vector<double> parse_grid(const std::string& text);

} // namespace fusionclust::cli
