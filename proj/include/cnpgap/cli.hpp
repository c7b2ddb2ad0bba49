#pragma once

#include <ostream>
#include <string_view>

namespace cnpgap::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Exit codes: 0 success, 1 domain error, 2 usage or configuration error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// Entry point for the `cnp_gapmeter` tool with subcommands gap, sweep,
/// bounds and worstcase.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace cnpgap::cli
