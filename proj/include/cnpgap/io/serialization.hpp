#pragma once

#include <json.hpp>

#include "cnpgap/gap.hpp"
#include "cnpgap/harness.hpp"
#include "cnpgap/model.hpp"

namespace cnpgap::io {

using Json = nlohmann::ordered_json;

// Model specs. Decoders are accepted either as {"type": "linear", ...},
// {"type": "scalar", "mean": ..., "variance": ...} or by catalog name
// ({"type": "tanh", ...}); they are always written in the first two forms.
// Parsing errors are ConfigError with a dotted field path.

Json to_json(const EncoderSpec& enc);
Json to_json(const DecoderSpec& dec);
EncoderSpec encoder_from_json(const Json& j, const std::string& path = "encoder");

/// `encoder_bound` fills the catalog defaults that depend on B_h (domain bound,
/// and r0 = -B_h for tight_lipschitz).
DecoderSpec decoder_from_json(const Json& j, double encoder_bound, const std::string& path = "decoder");

Json to_json(const SweepConfig& cfg);
/// Missing keys keep SweepConfig defaults; the result is validated.
SweepConfig sweep_config_from_json(const Json& j);

Json to_json(const ContextPoint& p);
Json to_json(const ContextSet& ctx);
ContextPoint context_point_from_json(const Json& j, const std::string& path);
/// Accepts an array of points or {"points": [...]}. Empty sets are allowed
/// here; emptiness is a domain error at aggregation time.
ContextSet context_from_json(const Json& j);

Json to_json(const GapResult& g);
Json to_json(const WorstCaseInstance& w);
Json to_json(const RateFit& f);

/// Parse with errors mapped to ConfigError(`what`, ...).
Json parse_json_text(const std::string& text, const std::string& what);

}  // namespace cnpgap::io
