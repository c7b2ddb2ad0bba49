#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cnpgap/harness.hpp"

namespace cnpgap::io {

inline constexpr std::string_view kTrialsHeader = "n,trial_index,delta_nats,bound_nats,seed_used";

/// Shortest decimal that parses back to the same double ("inf" for +inf).
std::string format_double(double v);

std::string trials_to_csv(const std::vector<TrialRecord>& records);

/// Parses output of trials_to_csv. Throws ConfigError("csv", ...) with the
/// line number on malformed input. regime_valid is not stored and reads back true.
std::vector<TrialRecord> parse_trials_csv(std::string_view text);

}  // namespace cnpgap::io
