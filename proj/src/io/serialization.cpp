#include "cnpgap/io/serialization.hpp"

#include <cmath>

#include "cnpgap/errors.hpp"

namespace cnpgap::io {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

const Json& require(const Json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path, "expected a JSON object");
    const auto it = j.find(key);
    if (it == j.end()) throw ConfigError(path + "." + key, "missing");
    return *it;
}

double number_at(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError(path, "must be finite");
    return v;
}

double number_or(const Json& j, const char* key, double fallback, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return number_at(*it, path + "." + key);
}

Vector vector_at(const Json& j, const std::string& path) {
    if (j.is_number()) return {number_at(j, path)};
    if (!j.is_array()) throw ConfigError(path, "expected an array of numbers");
    Vector v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number_at(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

std::size_t count_at(const Json& j, const std::string& path) {
    if (!j.is_number_integer()) throw ConfigError(path, "expected a non-negative integer");
    if (j.is_number_unsigned()) return j.get<std::size_t>();
    const auto v = j.get<std::int64_t>();
    if (v < 0) throw ConfigError(path, "expected a non-negative integer");
    return static_cast<std::size_t>(v);
}

std::string string_at(const Json& j, const std::string& path) {
    if (!j.is_string()) throw ConfigError(path, "expected a string");
    return j.get<std::string>();
}

}  // namespace

Json to_json(const EncoderSpec& enc) {
    return std::visit(overloaded{
                          [](const SignEncoder& e) { return Json{{"type", "sign"}, {"bound", e.bound}}; },
                          [](const BoundedTanhEncoder& e) {
                              return Json{{"type", "bounded_tanh"}, {"bound", e.bound}, {"a", e.a},
                                          {"b", e.b},               {"c", e.c}};
                          },
                      },
                      enc);
}

EncoderSpec encoder_from_json(const Json& j, const std::string& path) {
    const std::string type = string_at(require(j, "type", path), path + ".type");
    const double bound = number_or(j, "bound", 1.0, path);
    EncoderSpec enc;
    if (type == "sign") {
        enc = SignEncoder{bound};
    } else if (type == "bounded_tanh") {
        BoundedTanhEncoder t;
        t.bound = bound;
        t.b = j.contains("b") ? vector_at(j["b"], path + ".b") : Vector{1.0};
        const std::size_t d = t.b.size();
        t.c = j.contains("c") ? vector_at(j["c"], path + ".c") : Vector(d, 0.0);
        if (j.contains("a")) {
            const Json& a = j["a"];
            if (!a.is_array()) throw ConfigError(path + ".a", "expected an array of rows");
            for (std::size_t i = 0; i < a.size(); ++i) {
                t.a.push_back(vector_at(a[i], path + ".a[" + std::to_string(i) + "]"));
            }
        } else {
            t.a.assign(d, Vector{0.0});
        }
        enc = std::move(t);
    } else {
        throw ConfigError(path + ".type", "unknown encoder '" + type + "' (expected sign or bounded_tanh)");
    }
    try {
        validate(enc);
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
    return enc;
}

Json to_json(const DecoderSpec& dec) {
    return std::visit(overloaded{
                          [](const LinearDecoder& d) {
                              return Json{{"type", "linear"}, {"weights", d.weights}, {"sigma", d.sigma}};
                          },
                          [](const ScalarDecoder& d) {
                              return Json{{"type", "scalar"},
                                          {"mean", std::string(mean_fn_name(d.mean))},
                                          {"variance", std::string(variance_fn_name(d.variance))},
                                          {"sigma_min", d.sigma_min},
                                          {"slope", d.slope},
                                          {"k", d.steepness},
                                          {"L_sigma", d.var_slope},
                                          {"r0", d.var_center},
                                          {"bound", d.domain_bound}};
                          },
                      },
                      dec);
}

DecoderSpec decoder_from_json(const Json& j, double encoder_bound, const std::string& path) {
    const std::string type = string_at(require(j, "type", path), path + ".type");
    DecoderSpec dec;
    if (type == "linear") {
        LinearDecoder d;
        if (j.contains("weights")) {
            d.weights = vector_at(j["weights"], path + ".weights");
        } else {
            d.weights = {number_or(j, "B_W", 1.0, path)};
        }
        d.sigma = number_or(j, "sigma", 1.0, path);
        dec = std::move(d);
    } else if (type == "scalar") {
        ScalarDecoder d;
        const std::string mean = string_at(require(j, "mean", path), path + ".mean");
        const auto mean_fn = parse_mean_fn(mean);
        if (!mean_fn) throw ConfigError(path + ".mean", "unknown mean function '" + mean + "'");
        d.mean = *mean_fn;
        if (j.contains("variance")) {
            const std::string var = string_at(j["variance"], path + ".variance");
            const auto var_fn = parse_variance_fn(var);
            if (!var_fn) throw ConfigError(path + ".variance", "unknown variance function '" + var + "'");
            d.variance = *var_fn;
        }
        d.sigma_min = number_or(j, "sigma_min", 1.0, path);
        d.slope = number_or(j, "slope", 1.0, path);
        d.steepness = number_or(j, "k", 1.0, path);
        d.var_slope = number_or(j, "L_sigma", 0.0, path);
        d.domain_bound = number_or(j, "bound", encoder_bound, path);
        d.var_center = number_or(j, "r0", -d.domain_bound, path);
        dec = d;
    } else {
        CatalogParams p;
        p.sigma_min = number_or(j, "sigma_min", 1.0, path);
        p.bound = number_or(j, "bound", encoder_bound, path);
        p.steepness = number_or(j, "k", 1.0, path);
        p.lipschitz_mean = number_or(j, "L_mu", 1.0, path);
        p.lipschitz_std = number_or(j, "L_sigma", type == "tight_lipschitz" ? 1.0 : 0.0, path);
        p.var_center = number_or(j, "r0", -p.bound, path);
        auto d = catalog_decoder(type, p);
        if (!d) {
            throw ConfigError(path + ".type", "unknown decoder '" + type +
                                                  "' (expected linear, scalar, tanh, sinusoidal, relu, elu_sigvar, "
                                                  "cubic, log_contractive, sqrt, exp, steep_sigmoid, tight_lipschitz)");
        }
        dec = *d;
    }
    try {
        validate(dec);
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
    return dec;
}

Json to_json(const SweepConfig& cfg) {
    return Json{
        {"n_min", cfg.n_min},
        {"n_max", cfg.n_max},
        {"trials_per_n", cfg.trials_per_n},
        {"master_seed", cfg.master_seed},
        {"encoder", to_json(cfg.encoder)},
        {"decoder", to_json(cfg.decoder)},
        {"context_distribution", std::string(distribution_name(cfg.context_distribution))},
        {"mode", std::string(mode_name(cfg.mode))},
        {"search", std::string(search_name(cfg.search))},
        {"target", cfg.target},
    };
}

SweepConfig sweep_config_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
    SweepConfig cfg;
    if (j.contains("n_min")) cfg.n_min = count_at(j["n_min"], "n_min");
    if (j.contains("n_max")) cfg.n_max = count_at(j["n_max"], "n_max");
    if (j.contains("trials_per_n")) cfg.trials_per_n = count_at(j["trials_per_n"], "trials_per_n");
    if (j.contains("master_seed")) {
        const Json& s = j["master_seed"];
        if (!s.is_number_integer() || (!s.is_number_unsigned() && s.get<std::int64_t>() < 0)) {
            throw ConfigError("master_seed", "expected a non-negative 64-bit integer");
        }
        cfg.master_seed = s.get<std::uint64_t>();
    }
    if (j.contains("encoder")) cfg.encoder = encoder_from_json(j["encoder"]);
    if (j.contains("decoder")) cfg.decoder = decoder_from_json(j["decoder"], encoder_bound(cfg.encoder));
    if (j.contains("context_distribution")) {
        const std::string s = string_at(j["context_distribution"], "context_distribution");
        const auto d = parse_distribution(s);
        if (!d) throw ConfigError("context_distribution", "unknown distribution '" + s + "'");
        cfg.context_distribution = *d;
    }
    if (j.contains("mode")) {
        const std::string s = string_at(j["mode"], "mode");
        const auto m = parse_mode(s);
        if (!m) throw ConfigError("mode", "unknown mode '" + s + "' (expected random, worstcase or singularity)");
        cfg.mode = *m;
    }
    if (j.contains("search")) {
        const std::string s = string_at(j["search"], "search");
        const auto v = parse_search(s);
        if (!v) throw ConfigError("search", "unknown search '" + s + "' (expected auto, grid or construction)");
        cfg.search = *v;
    }
    if (j.contains("target")) cfg.target = number_at(j["target"], "target");
    validate(cfg);
    return cfg;
}

Json to_json(const ContextPoint& p) {
    Json j{{"x", p.x}, {"y", p.y}};
    if (p.label) j["label"] = *p.label;
    return j;
}

Json to_json(const ContextSet& ctx) {
    Json arr = Json::array();
    for (const auto& p : ctx.points()) arr.push_back(to_json(p));
    return arr;
}

ContextPoint context_point_from_json(const Json& j, const std::string& path) {
    ContextPoint p;
    p.x = vector_at(require(j, "x", path), path + ".x");
    p.y = number_at(require(j, "y", path), path + ".y");
    if (j.contains("label") && !j["label"].is_null()) p.label = string_at(j["label"], path + ".label");
    return p;
}

ContextSet context_from_json(const Json& j) {
    const Json* points = &j;
    if (j.is_object()) points = &require(j, "points", "context");
    if (!points->is_array()) throw ConfigError("context.points", "expected an array");
    std::vector<ContextPoint> pts;
    for (std::size_t i = 0; i < points->size(); ++i) {
        pts.push_back(context_point_from_json((*points)[i], "context.points[" + std::to_string(i) + "]"));
    }
    return ContextSet(std::move(pts));
}

Json to_json(const GapResult& g) {
    return Json{{"delta", g.delta},         {"mu_c", g.mu_c},   {"mu_cplus", g.mu_cplus},
                {"sigma_c", g.sigma_c},     {"sigma_cplus", g.sigma_cplus},
                {"delta_r", g.delta_r},     {"n", g.n}};
}

Json to_json(const WorstCaseInstance& w) {
    return Json{{"encoder", to_json(w.encoder)},     {"decoder", to_json(w.decoder)},
                {"context", to_json(w.context)},     {"new_point", to_json(w.new_point)},
                {"target", w.target},                {"predicted_gap", w.predicted_gap}};
}

Json to_json(const RateFit& f) {
    return Json{{"beta", f.beta},
                {"log_intercept", f.log_intercept},
                {"r_squared", f.r_squared},
                {"n_range", {f.n_range_used.first, f.n_range_used.second}},
                {"points_used", f.points_used},
                {"points_excluded", f.points_excluded}};
}

Json parse_json_text(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ConfigError(what, std::string("invalid JSON: ") + e.what());
    }
}

}  // namespace cnpgap::io
