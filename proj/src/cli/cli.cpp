#include "cnpgap/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>

#include "cnpgap/errors.hpp"
#include "cnpgap/gap.hpp"
#include "cnpgap/harness.hpp"
#include "cnpgap/io/csv.hpp"
#include "cnpgap/io/files.hpp"
#include "cnpgap/io/serialization.hpp"
#include "cnpgap/panels.hpp"

namespace cnpgap::cli {

namespace {

namespace fs = std::filesystem;
using io::Json;

std::string iso_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::pair<std::size_t, std::size_t> parse_range(const std::string& text, const std::string& field) {
    const auto colon = text.find(':');
    try {
        std::size_t used = 0;
        if (colon == std::string::npos) {
            const auto v = std::stoull(text, &used);
            if (used != text.size()) throw std::invalid_argument(text);
            return {v, v};
        }
        const std::string lo_s = text.substr(0, colon);
        const std::string hi_s = text.substr(colon + 1);
        const auto lo = std::stoull(lo_s, &used);
        if (used != lo_s.size()) throw std::invalid_argument(text);
        const auto hi = std::stoull(hi_s, &used);
        if (used != hi_s.size()) throw std::invalid_argument(text);
        if (hi < lo) throw ConfigError(field, "range end is below its start");
        return {lo, hi};
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception&) {
        throw ConfigError(field, "expected N or LO:HI, got '" + text + "'");
    }
}

// ---------------------------------------------------------------------------
// Encoder/decoder flags shared by `gap` and `sweep`. They are applied on top of
// the JSON config (flags win), then the merged document is parsed.

struct ModelFlags {
    std::string config_path;
    std::optional<std::string> encoder;
    std::optional<double> bh;
    std::optional<std::string> decoder;
    std::optional<std::vector<double>> weights;
    std::optional<double> bw;
    std::optional<double> sigma;
    std::optional<double> sigma_min;
    std::optional<double> lmu;
    std::optional<double> lsigma;
    std::optional<double> r0;
    std::optional<double> k;
};

void add_model_flags(CLI::App& app, ModelFlags& f) {
    app.add_option("--config", f.config_path, "JSON configuration file");
    app.add_option("--encoder", f.encoder, "encoder type: sign | bounded_tanh");
    app.add_option("--bh", f.bh, "encoder bound B_h");
    app.add_option("--decoder", f.decoder,
                   "decoder: linear, tanh, sinusoidal, relu, elu_sigvar, cubic, log_contractive, sqrt, exp, "
                   "steep_sigmoid, tight_lipschitz");
    app.add_option("--weights", f.weights, "linear decoder weight vector W")->delimiter(',');
    app.add_option("--bw", f.bw, "linear decoder scalar weight B_W (shorthand for --weights B_W)");
    app.add_option("--sigma", f.sigma, "linear decoder constant std");
    app.add_option("--sigma-min", f.sigma_min, "catalog decoder std floor");
    app.add_option("--lmu", f.lmu, "tight_lipschitz mean slope L_mu");
    app.add_option("--lsigma", f.lsigma, "tight_lipschitz std slope L_sigma");
    app.add_option("--r0", f.r0, "tight_lipschitz std reference point");
    app.add_option("--k", f.k, "steep_sigmoid steepness");
}

Json load_config(const std::string& path) {
    if (path.empty()) return Json::object();
    Json j = io::parse_json_text(io::read_text_file(path), "config");
    if (!j.is_object()) throw ConfigError("config", "top level must be a JSON object");
    return j;
}

void apply_model_flags(Json& j, const ModelFlags& f) {
    if (f.encoder) j["encoder"] = Json{{"type", *f.encoder}};
    if (f.bh) {
        if (!j.contains("encoder")) j["encoder"] = Json{{"type", "sign"}};
        j["encoder"]["bound"] = *f.bh;
    }
    if (f.decoder) j["decoder"] = Json{{"type", *f.decoder}};
    auto set_decoder = [&](const char* key, const Json& v) {
        if (!j.contains("decoder")) j["decoder"] = Json{{"type", "linear"}};
        j["decoder"][key] = v;
    };
    if (f.weights) set_decoder("weights", *f.weights);
    if (f.bw) set_decoder("weights", Json::array({*f.bw}));
    if (f.sigma) set_decoder("sigma", *f.sigma);
    if (f.sigma_min) set_decoder("sigma_min", *f.sigma_min);
    if (f.lmu) {
        set_decoder("L_mu", *f.lmu);
        if (j["decoder"].value("type", "") == "scalar") j["decoder"]["slope"] = *f.lmu;
    }
    if (f.lsigma) set_decoder("L_sigma", *f.lsigma);
    if (f.r0) set_decoder("r0", *f.r0);
    if (f.k) set_decoder("k", *f.k);
}

std::pair<EncoderSpec, DecoderSpec> model_from_json(const Json& j) {
    const EncoderSpec enc = j.contains("encoder") ? io::encoder_from_json(j["encoder"]) : EncoderSpec{SignEncoder{}};
    const DecoderSpec dec = j.contains("decoder") ? io::decoder_from_json(j["decoder"], encoder_bound(enc))
                                                  : DecoderSpec{LinearDecoder{{1.0}, 1.0}};
    const std::size_t dec_dim = std::holds_alternative<LinearDecoder>(dec) ? std::get<LinearDecoder>(dec).weights.size()
                                                                          : std::size_t{1};
    if (encoder_dim(enc) != dec_dim) {
        throw ConfigError("decoder", "representation dimension differs from the encoder output dimension");
    }
    return {enc, dec};
}

// ---------------------------------------------------------------------------
// gap

struct GapFlags {
    ModelFlags model;
    std::string context_file;
    std::optional<std::vector<double>> context_y;
    std::optional<std::vector<double>> context_x;
    std::optional<std::size_t> negative_context;
    std::optional<std::vector<double>> new_x;
    std::optional<double> new_y;
    std::optional<std::vector<double>> target;
};

ContextSet gap_context(const GapFlags& f, const Json& cfg) {
    const int sources = (!f.context_file.empty()) + f.context_y.has_value() + f.negative_context.has_value();
    if (sources > 1) throw ConfigError("context", "give only one of --context-file, --context-y, --negative-context");
    if (!f.context_file.empty()) {
        return io::context_from_json(io::parse_json_text(io::read_text_file(f.context_file), "context-file"));
    }
    if (f.negative_context) return negative_context(*f.negative_context);
    if (f.context_y) {
        const auto& ys = *f.context_y;
        if (f.context_x && f.context_x->size() != ys.size()) {
            throw ConfigError("context-x", "must have as many entries as --context-y");
        }
        std::vector<ContextPoint> pts;
        for (std::size_t i = 0; i < ys.size(); ++i) {
            const double x = f.context_x ? (*f.context_x)[i] : static_cast<double>(i + 1) / static_cast<double>(ys.size());
            pts.push_back(ContextPoint{{x}, ys[i], std::nullopt});
        }
        return ContextSet(std::move(pts));
    }
    if (cfg.contains("context")) return io::context_from_json(cfg["context"]);
    throw ConfigError("context", "no context given (use --context-file, --context-y or --negative-context)");
}

int cmd_gap(const GapFlags& f, std::ostream& out) {
    Json cfg = load_config(f.model.config_path);
    apply_model_flags(cfg, f.model);
    const auto [enc, dec] = model_from_json(cfg);
    const ContextSet ctx = gap_context(f, cfg);

    ContextPoint new_point{{0.5}, 0.0, std::nullopt};
    if (cfg.contains("new_point")) new_point = io::context_point_from_json(cfg["new_point"], "new_point");
    else if (!f.new_y) throw ConfigError("new-y", "the new observation's output is required");
    if (f.new_y) new_point.y = *f.new_y;
    if (f.new_x) new_point.x = *f.new_x;

    Vector target{0.0};
    if (cfg.contains("target")) {
        const Json& t = cfg["target"];
        target = t.is_array() ? t.get<Vector>() : Vector{t.get<double>()};
    }
    if (f.target) target = *f.target;

    const GapResult g = consistency_gap(enc, dec, ctx, new_point, target);
    out << io::to_json(g).dump(2) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepFlags {
    ModelFlags model;
    std::optional<std::string> mode;
    std::optional<std::string> n_range;
    std::optional<std::size_t> trials;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> distribution;
    std::optional<std::string> search;
    std::optional<double> target;
    std::optional<unsigned> threads;
    std::string out_dir = ".";
    std::string name;
    std::string fit_range = "10:300";
    std::string aggregate = "max";
    bool figures = false;
    std::string replay;
    std::optional<std::string> panel;
};

Aggregate parse_aggregate(const std::string& s) {
    if (s == "max") return Aggregate::Max;
    if (s == "mean") return Aggregate::Mean;
    throw ConfigError("aggregate", "expected max or mean, got '" + s + "'");
}

fs::path output_path(const SweepFlags& f, const std::string& file) {
    return fs::path(f.out_dir) / (f.name.empty() ? file : f.name + "_" + file);
}

Json manifest_json(const Json& config_echo, std::uint64_t seed, const std::vector<std::string>& paths) {
    return Json{{"tool_version", std::string(kToolVersion)},
                {"timestamp", iso_timestamp()},
                {"master_seed", seed},
                {"config_echo", config_echo},
                {"output_paths", paths}};
}

int run_panel_sweep(const SweepFlags& f, std::ostream& out) {
    PanelOptions opts;
    opts.seed = f.seed.value_or(0);
    opts.trials = f.trials.value_or(300);
    opts.workers = f.threads.value_or(0);
    if (f.n_range) opts.n_range = parse_range(*f.n_range, "n");
    opts.fit_range = parse_range(f.fit_range, "fit-range");
    opts.figures = f.figures;
    const PanelOutput panel = run_panel(*f.panel, opts);

    io::OutputBatch batch;
    for (const auto& file : panel.files) batch.add(output_path(f, file.name), file.content);
    const fs::path manifest_path = output_path(f, *f.panel + "_manifest.json");
    std::vector<std::string> paths = batch.paths();
    paths.push_back(manifest_path.string());
    const Json echo{{"panel", *f.panel},
                    {"master_seed", opts.seed},
                    {"trials_per_n", opts.trials},
                    {"n_range", {opts.n_range.first, opts.n_range.second}},
                    {"fit_range", {opts.fit_range.first, opts.fit_range.second}},
                    {"figures", opts.figures},
                    {"name", f.name}};
    batch.add(manifest_path, manifest_json(echo, opts.seed, paths).dump(2) + "\n");
    batch.commit();
    out << panel.summary.dump(2) << '\n';
    return kExitOk;
}

int cmd_sweep(SweepFlags f, std::ostream& out, std::ostream& err) {
    Json cfg_json;
    if (!f.replay.empty()) {
        const Json manifest = io::parse_json_text(io::read_text_file(f.replay), "replay");
        if (!manifest.contains("config_echo")) throw ConfigError("replay.config_echo", "missing");
        const Json& echo = manifest["config_echo"];
        if (echo.contains("panel")) {
            f.panel = echo["panel"].get<std::string>();
            f.seed = echo["master_seed"].get<std::uint64_t>();
            f.trials = echo["trials_per_n"].get<std::size_t>();
            f.n_range = std::to_string(echo["n_range"][0].get<std::size_t>()) + ":" +
                        std::to_string(echo["n_range"][1].get<std::size_t>());
        } else {
            if (!echo.contains("sweep")) throw ConfigError("replay.config_echo.sweep", "missing");
            cfg_json = echo["sweep"];
            f.aggregate = echo.value("aggregate", f.aggregate);
        }
        f.fit_range = std::to_string(echo["fit_range"][0].get<std::size_t>()) + ":" +
                      std::to_string(echo["fit_range"][1].get<std::size_t>());
        f.figures = echo.value("figures", false);
        if (f.name.empty()) f.name = echo.value("name", std::string{});
    }
    if (f.panel) return run_panel_sweep(f, out);

    if (f.replay.empty()) {
        cfg_json = load_config(f.model.config_path);
        apply_model_flags(cfg_json, f.model);
        if (f.mode) cfg_json["mode"] = *f.mode;
        if (f.n_range) {
            const auto [lo, hi] = parse_range(*f.n_range, "n");
            cfg_json["n_min"] = lo;
            cfg_json["n_max"] = hi;
        }
        if (f.trials) cfg_json["trials_per_n"] = *f.trials;
        if (f.seed) cfg_json["master_seed"] = *f.seed;
        if (f.distribution) cfg_json["context_distribution"] = *f.distribution;
        if (f.search) cfg_json["search"] = *f.search;
        if (f.target) cfg_json["target"] = *f.target;
    }
    const SweepConfig cfg = io::sweep_config_from_json(cfg_json);
    const auto fit_range = parse_range(f.fit_range, "fit-range");
    const Aggregate agg = parse_aggregate(f.aggregate);

    if (cfg.mode == SweepMode::Singularity) {
        const std::size_t skipped = (cfg.n_max - cfg.n_min + 1) - sweep_sizes(cfg).size();
        if (skipped > 0) err << "singularity mode: skipped " << skipped << " odd context sizes\n";
    }

    const auto records = run_sweep(cfg, f.threads.value_or(0));
    const std::string csv = io::trials_to_csv(records);

    Json fit;
    try {
        fit = io::to_json(fit_power_law(records, agg, fit_range));
    } catch (const InsufficientDataError& e) {
        fit = Json{{"beta", nullptr}, {"r_squared", nullptr}, {"n_range", {fit_range.first, fit_range.second}},
                   {"error", e.what()}};
    }
    fit["aggregate"] = f.aggregate;

    io::OutputBatch batch;
    batch.add(output_path(f, "trials.csv"), csv);
    batch.add(output_path(f, "fit.json"), fit.dump(2) + "\n");
    if (f.figures) {
        const std::string title = std::string(mode_name(cfg.mode)) + " sweep";
        batch.add(output_path(f, "gap.svg"), gap_figure(csv, title));
        if (std::string ratio = ratio_figure(csv, title); !ratio.empty()) batch.add(output_path(f, "ratio.svg"), ratio);
    }
    const fs::path manifest_path = output_path(f, "manifest.json");
    std::vector<std::string> paths = batch.paths();
    paths.push_back(manifest_path.string());
    const Json echo{{"sweep", io::to_json(cfg)},
                    {"fit_range", {fit_range.first, fit_range.second}},
                    {"aggregate", f.aggregate},
                    {"figures", f.figures},
                    {"name", f.name}};
    batch.add(manifest_path, manifest_json(echo, cfg.master_seed, paths).dump(2) + "\n");
    batch.commit();
    out << fit.dump(2) << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bounds

struct BoundsFlags {
    double bw = 1.0;
    double bh = 1.0;
    double sigma = 1.0;
    std::vector<std::size_t> ns{1, 10, 100};
    std::optional<double> eps;
    std::optional<double> lmu;
    std::optional<double> lsigma;
    std::optional<double> sigma_min;
};

void require_positive_flag(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be positive");
}

int cmd_bounds(const BoundsFlags& f, std::ostream& out) {
    require_positive_flag(f.bw, "bw");
    require_positive_flag(f.bh, "bh");
    require_positive_flag(f.sigma, "sigma");
    if (f.eps) require_positive_flag(*f.eps, "eps");
    for (std::size_t n : f.ns) {
        if (n == 0) throw ConfigError("n", "context sizes must be >= 1");
    }
    const bool lipschitz = f.lmu || f.lsigma || f.sigma_min;
    const double lmu = f.lmu.value_or(f.bw);
    const double lsigma = f.lsigma.value_or(0.0);
    const double smin = f.sigma_min.value_or(f.sigma);
    if (lipschitz) {
        if (!(lmu >= 0.0)) throw ConfigError("lmu", "must be non-negative");
        if (!(lsigma >= 0.0)) throw ConfigError("lsigma", "must be non-negative");
        require_positive_flag(smin, "sigma-min");
    }

    out << std::left << std::setw(8) << "n" << std::setw(26) << "linear_bound_nats";
    if (lipschitz) out << std::setw(26) << "lipschitz_bound_nats" << "regime_valid";
    out << '\n';
    for (std::size_t n : f.ns) {
        out << std::setw(8) << n << std::setw(26) << io::format_double(bound_linear(f.bw, f.bh, f.sigma, n).bound);
        if (lipschitz) {
            const BoundEvaluation b = bound_lipschitz(lmu, lsigma, f.bh, smin, n);
            out << std::setw(26) << io::format_double(b.bound) << (b.regime_valid ? "true" : "false");
        }
        out << '\n';
    }
    if (f.eps) {
        out << "min_context_for_eps(eps=" << io::format_double(*f.eps)
            << "): " << min_context_for_eps(f.bw, f.bh, f.sigma, *f.eps) << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// worstcase

struct WorstCaseFlags {
    std::string kind = "linear";
    std::size_t n = 10;
    double bw = 1.0;
    double bh = 1.0;
    double sigma = 1.0;
    double lmu = 1.0;
    double lsigma = 1.0;
    double sigma_min = 0.5;
    double target = 0.0;
};

int cmd_worstcase(const WorstCaseFlags& f, std::ostream& out) {
    if (f.n == 0) throw ConfigError("n", "must be >= 1");
    WorstCaseInstance inst = [&] {
        try {
            if (f.kind == "linear") return construct_worstcase_linear(f.bw, f.bh, f.sigma, f.n, f.target);
            if (f.kind == "lipschitz") {
                return construct_worstcase_lipschitz(f.lmu, f.lsigma, f.bh, f.sigma_min, f.n, f.target);
            }
        } catch (const DomainError& e) {
            throw ConfigError(f.kind, e.what());
        }
        throw ConfigError("kind", "expected linear or lipschitz, got '" + f.kind + "'");
    }();
    Json j = io::to_json(inst);
    j["measured"] = io::to_json(inst.evaluate());
    out << j.dump(2) << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Measure, bound and stress-test the conditioning consistency gap of conditional neural processes",
                 "cnp_gapmeter"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    GapFlags gap;
    auto* gap_cmd = app.add_subcommand("gap", "KL gap between predictives after and before adding one point");
    add_model_flags(*gap_cmd, gap.model);
    gap_cmd->add_option("--context-file", gap.context_file, "JSON context: [{\"x\": [..], \"y\": ..}, ...]");
    gap_cmd->add_option("--context-y", gap.context_y, "comma-separated context outputs")->delimiter(',');
    gap_cmd->add_option("--context-x", gap.context_x, "comma-separated 1-D context inputs (default i/n)")
        ->delimiter(',');
    gap_cmd->add_option("--negative-context", gap.negative_context, "n points with y = -1 at x = i/n");
    gap_cmd->add_option("--new-x", gap.new_x, "input of the new observation (default 0.5)")->delimiter(',');
    gap_cmd->add_option("--new-y", gap.new_y, "output of the new observation");
    gap_cmd->add_option("--target", gap.target, "target input (default 0)")->delimiter(',');

    SweepFlags sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "run a seeded sweep over context sizes");
    add_model_flags(*sweep_cmd, sweep.model);
    sweep_cmd->add_option("--mode", sweep.mode, "random | worstcase | singularity");
    sweep_cmd->add_option("--n", sweep.n_range, "context sizes LO:HI");
    sweep_cmd->add_option("--trials", sweep.trials, "random trials per n");
    sweep_cmd->add_option("--seed", sweep.seed, "master seed");
    sweep_cmd->add_option("--distribution", sweep.distribution, "standard_normal | uniform");
    sweep_cmd->add_option("--search", sweep.search, "worst-case search: auto | grid | construction");
    sweep_cmd->add_option("--target", sweep.target, "target input for deterministic modes");
    sweep_cmd->add_option("--threads", sweep.threads, "worker threads (default: CNP_GAPMETER_THREADS or all cores)");
    sweep_cmd->add_option("--out", sweep.out_dir, "output directory");
    sweep_cmd->add_option("--name", sweep.name, "prefix for output file names");
    sweep_cmd->add_option("--fit-range", sweep.fit_range, "power-law fit range LO:HI");
    sweep_cmd->add_option("--aggregate", sweep.aggregate, "per-n aggregate for the fit: max | mean");
    sweep_cmd->add_flag("--figures", sweep.figures, "also write SVG figures");
    sweep_cmd->add_option("--replay", sweep.replay, "re-run the sweep recorded in a manifest");
    sweep_cmd->add_option("--panel", sweep.panel, "figure preset: fig1a fig1b fig1c fig2a fig2b fig2c fig2d");

    BoundsFlags bounds;
    auto* bounds_cmd = app.add_subcommand("bounds", "evaluate the linear and Lipschitz gap bounds");
    bounds_cmd->add_option("--bw", bounds.bw, "decoder weight bound B_W");
    bounds_cmd->add_option("--bh", bounds.bh, "encoder bound B_h");
    bounds_cmd->add_option("--sigma", bounds.sigma, "constant decoder std");
    bounds_cmd->add_option("--n", bounds.ns, "context sizes")->delimiter(',');
    bounds_cmd->add_option("--eps", bounds.eps, "target gap; prints the smallest n reaching it");
    bounds_cmd->add_option("--lmu", bounds.lmu, "mean Lipschitz constant (enables the Lipschitz column)");
    bounds_cmd->add_option("--lsigma", bounds.lsigma, "std Lipschitz constant");
    bounds_cmd->add_option("--sigma-min", bounds.sigma_min, "std floor");

    WorstCaseFlags wc;
    auto* wc_cmd = app.add_subcommand("worstcase", "print the tight worst-case instance as JSON");
    wc_cmd->add_option("--kind", wc.kind, "linear | lipschitz");
    wc_cmd->add_option("--n", wc.n, "context size");
    wc_cmd->add_option("--bw", wc.bw, "B_W (linear)");
    wc_cmd->add_option("--bh", wc.bh, "B_h");
    wc_cmd->add_option("--sigma", wc.sigma, "sigma (linear)");
    wc_cmd->add_option("--lmu", wc.lmu, "L_mu (lipschitz)");
    wc_cmd->add_option("--lsigma", wc.lsigma, "L_sigma (lipschitz)");
    wc_cmd->add_option("--sigma-min", wc.sigma_min, "sigma_min (lipschitz)");
    wc_cmd->add_option("--target", wc.target, "target input");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gap_cmd) return cmd_gap(gap, out);
        if (*sweep_cmd) return cmd_sweep(sweep, out, err);
        if (*bounds_cmd) return cmd_bounds(bounds, out);
        if (*wc_cmd) return cmd_worstcase(wc, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const nlohmann::json::exception& e) {
        err << "error: config: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitUsage;
}

}  // namespace cnpgap::cli
