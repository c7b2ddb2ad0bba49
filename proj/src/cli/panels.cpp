#include "cnpgap/panels.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "cnpgap/errors.hpp"
#include "cnpgap/io/csv.hpp"
#include "cnpgap/io/svg.hpp"

namespace cnpgap {

namespace {

using io::Json;
using Points = std::vector<std::pair<double, double>>;

struct PerN {
    double max = 0.0;
    double sum = 0.0;
    std::size_t count = 0;
    double bound = 0.0;
};

std::map<std::size_t, PerN> summarize(const std::vector<TrialRecord>& records) {
    std::map<std::size_t, PerN> out;
    for (const auto& r : records) {
        PerN& p = out[r.n];
        p.max = p.count == 0 ? r.delta : std::max(p.max, r.delta);
        p.sum += r.delta;
        p.bound = r.bound;
        ++p.count;
    }
    return out;
}

Points max_curve(const std::vector<TrialRecord>& records) {
    Points pts;
    for (const auto& [n, p] : summarize(records)) pts.emplace_back(static_cast<double>(n), p.max);
    return pts;
}

Points mean_curve(const std::vector<TrialRecord>& records) {
    Points pts;
    for (const auto& [n, p] : summarize(records)) {
        pts.emplace_back(static_cast<double>(n), p.sum / static_cast<double>(p.count));
    }
    return pts;
}

Points bound_curve(const std::vector<TrialRecord>& records) {
    Points pts;
    for (const auto& [n, p] : summarize(records)) pts.emplace_back(static_cast<double>(n), p.bound);
    return pts;
}

Points fitted_curve(const RateFit& fit, const Points& like) {
    Points pts;
    for (const auto& [n, d] : like) {
        if (n < static_cast<double>(fit.n_range_used.first) || n > static_cast<double>(fit.n_range_used.second)) {
            continue;
        }
        pts.emplace_back(n, std::exp(fit.log_intercept) * std::pow(n, -fit.beta));
    }
    return pts;
}

Json fit_or_error(const std::vector<TrialRecord>& records, Aggregate agg, std::pair<std::size_t, std::size_t> range) {
    try {
        return io::to_json(fit_power_law(records, agg, range));
    } catch (const InsufficientDataError& e) {
        return Json{{"beta", nullptr}, {"r_squared", nullptr}, {"n_range", {range.first, range.second}},
                    {"error", e.what()}};
    }
}

SweepConfig base_config(const PanelOptions& opts) {
    SweepConfig cfg;
    cfg.n_min = opts.n_range.first;
    cfg.n_max = opts.n_range.second;
    cfg.trials_per_n = 1;
    cfg.master_seed = opts.seed;
    cfg.mode = SweepMode::WorstCase;
    return cfg;
}

ScalarDecoder catalog(const std::string& name, double sigma_min = 1.0, double bound = 1.0) {
    CatalogParams p;
    p.sigma_min = sigma_min;
    p.bound = bound;
    return *catalog_decoder(name, p);
}

// Each series is serialized first and its figure data is re-read from the CSV
// text, so figures can never disagree with the numbers on disk.
struct Series {
    std::string name;
    std::string csv;
    std::vector<TrialRecord> parsed;
};

Series make_series(std::string name, const std::vector<TrialRecord>& records) {
    Series s{std::move(name), io::trials_to_csv(records), {}};
    s.parsed = io::parse_trials_csv(s.csv);
    return s;
}

PanelOutput fig1a(const PanelOptions& opts) {
    SweepConfig random_cfg = base_config(opts);
    random_cfg.mode = SweepMode::Random;
    random_cfg.trials_per_n = opts.trials;
    const auto random_records = run_sweep(random_cfg, opts.workers);
    const auto worst_records = run_sweep(base_config(opts), opts.workers);

    std::size_t violations = 0;
    double max_ratio = 0.0;
    for (const auto& r : random_records) {
        if (r.delta > r.bound + 1e-12) ++violations;
        max_ratio = std::max(max_ratio, r.delta / r.bound);
    }
    double worst_dev = 0.0;
    for (const auto& p : ratio_to_bound_curve(worst_records)) worst_dev = std::max(worst_dev, std::abs(p.ratio - 1.0));

    PanelOutput out;
    const Series random = make_series("fig1a_random", random_records);
    const Series worst = make_series("fig1a_worstcase", worst_records);
    out.files.push_back({random.name + ".csv", random.csv});
    out.files.push_back({worst.name + ".csv", worst.csv});
    out.summary = Json{{"panel", "fig1a"},
                       {"random_trials", random_records.size()},
                       {"bound_violations", violations},
                       {"max_random_ratio", max_ratio},
                       {"worstcase_max_abs_ratio_minus_1", worst_dev},
                       {"worstcase_fit", fit_or_error(worst_records, Aggregate::Max, opts.fit_range)},
                       {"random_max_fit", fit_or_error(random_records, Aggregate::Max, opts.fit_range)}};
    if (opts.figures) {
        io::PlotSpec plot{"Linear decoder: gap vs context size", "context size n", "gap (nats)", true, true, {}};
        plot.series.push_back({"random (max)", max_curve(random.parsed), "", false, false});
        plot.series.push_back({"random (mean)", mean_curve(random.parsed), "", false, false});
        plot.series.push_back({"worst case", max_curve(worst.parsed), "", false, false});
        plot.series.push_back({"bound", bound_curve(worst.parsed), "#000000", true, false});
        out.files.push_back({"fig1a.svg", io::render_svg(plot)});
    }
    return out;
}

PanelOutput fig1b(const PanelOptions& opts) {
    PanelOutput out;
    Json fits = Json::object();
    io::PlotSpec plot{"Lipschitz decoders: worst-case gap", "context size n", "gap (nats)", true, true, {}};
    for (const auto& name : lipschitz_catalog_names()) {
        SweepConfig cfg = base_config(opts);
        cfg.decoder = catalog(name);
        const auto records = run_sweep(cfg, opts.workers);
        const Series s = make_series("fig1b_" + name, records);
        out.files.push_back({s.name + ".csv", s.csv});
        fits[name] = fit_or_error(records, Aggregate::Max, opts.fit_range);
        plot.series.push_back({name, max_curve(s.parsed), "", false, false});
    }
    out.summary = Json{{"panel", "fig1b"}, {"fits", fits}};
    if (opts.figures) out.files.push_back({"fig1b.svg", io::render_svg(plot)});
    return out;
}

PanelOutput fig1c(const PanelOptions& opts) {
    constexpr double l_mu = 1.0, l_sigma = 1.0, b_h = 1.0, sigma_min = 0.5;
    SweepConfig cfg = base_config(opts);
    CatalogParams p;
    p.sigma_min = sigma_min;
    p.bound = b_h;
    p.lipschitz_mean = l_mu;
    p.lipschitz_std = l_sigma;
    p.var_center = -b_h;
    cfg.decoder = *catalog_decoder("tight_lipschitz", p);
    const auto records = run_sweep(cfg, opts.workers);
    const Series s = make_series("fig1c_tight_lipschitz", records);

    double dev_large_n = 0.0;
    for (const auto& r : ratio_to_bound_curve(records)) {
        if (r.n >= 100) dev_large_n = std::max(dev_large_n, std::abs(r.ratio - 1.0));
    }
    PanelOutput out;
    out.files.push_back({s.name + ".csv", s.csv});
    out.summary = Json{{"panel", "fig1c"},
                       {"constants", {{"L_mu", l_mu}, {"L_sigma", l_sigma}, {"B_h", b_h}, {"sigma_min", sigma_min}}},
                       {"max_abs_ratio_minus_1_n_ge_100", dev_large_n}};
    if (opts.figures) {
        Points ratio;
        for (const auto& r : ratio_to_bound_curve(s.parsed)) ratio.emplace_back(static_cast<double>(r.n), r.ratio);
        Points one;
        for (const auto& [n, v] : ratio) one.emplace_back(n, 1.0);
        io::PlotSpec plot{"Lipschitz construction: gap / bound", "context size n", "ratio", true, false, {}};
        plot.series.push_back({"gap / bound", ratio, "", false, false});
        plot.series.push_back({"1", one, "#000000", true, false});
        out.files.push_back({"fig1c.svg", io::render_svg(plot)});
    }
    return out;
}

PanelOutput single_decoder_panel(const std::string& panel, const std::string& decoder, SweepMode mode,
                                 const std::string& title, const PanelOptions& opts) {
    SweepConfig cfg = base_config(opts);
    cfg.decoder = catalog(decoder);
    cfg.mode = mode;
    const auto records = run_sweep(cfg, opts.workers);
    const Series s = make_series(panel + "_" + decoder + "_" + std::string(mode_name(mode)), records);
    PanelOutput out;
    out.files.push_back({s.name + ".csv", s.csv});
    const Json fit = fit_or_error(records, Aggregate::Max, opts.fit_range);
    out.summary = Json{{"panel", panel}, {"decoder", decoder}, {"mode", std::string(mode_name(mode))}, {"fit", fit}};
    if (opts.figures) {
        io::PlotSpec plot{title, "context size n", "gap (nats)", true, true, {}};
        const Points curve = max_curve(s.parsed);
        plot.series.push_back({decoder, curve, "", false, true});
        if (!fit["beta"].is_null()) {
            const RateFit rf = fit_power_law(s.parsed, Aggregate::Max, opts.fit_range);
            plot.series.push_back({"fit n^-" + io::format_double(std::round(rf.beta * 100.0) / 100.0),
                                   fitted_curve(rf, curve), "#000000", true, false});
        }
        out.files.push_back({panel + ".svg", io::render_svg(plot)});
    }
    return out;
}

PanelOutput fig2d(const PanelOptions& opts) {
    const std::vector<double> ks{1.0, 4.0, 16.0, 64.0};
    PanelOutput out;
    Json fits = Json::array();
    io::PlotSpec plot{"Steep sigmoid at r = 0", "context size n", "gap (nats)", true, true, {}};
    std::vector<double> constants;
    for (double k : ks) {
        const auto records = steep_sigmoid_sweep(k, kSteepSigmoidRange, 1.0, 1.0, opts.workers);
        const Series s = make_series("fig2d_k" + io::format_double(k), records);
        out.files.push_back({s.name + ".csv", s.csv});
        const RateFit fit = fit_power_law(records, Aggregate::Max, kSteepSigmoidRange);
        constants.push_back(std::exp(fit.log_intercept));
        fits.push_back(Json{{"k", k}, {"fit", io::to_json(fit)}, {"constant", constants.back()}});
        plot.series.push_back({"k = " + io::format_double(k), max_curve(s.parsed), "", false, false});
    }
    Json ratios = Json::array();
    for (std::size_t i = 1; i < constants.size(); ++i) ratios.push_back(constants[i] / constants[i - 1]);
    out.summary = Json{{"panel", "fig2d"},
                       {"n_range", {kSteepSigmoidRange.first, kSteepSigmoidRange.second}},
                       {"fits", fits},
                       {"constant_ratios_4k_over_k", ratios}};
    if (opts.figures) out.files.push_back({"fig2d.svg", io::render_svg(plot)});
    return out;
}

std::string figure_from_records(const std::vector<TrialRecord>& records, const std::string& title) {
    io::PlotSpec plot{title, "context size n", "gap (nats)", true, true, {}};
    plot.series.push_back({"max", max_curve(records), "", false, false});
    bool multi = false;
    for (const auto& [n, p] : summarize(records)) multi = multi || p.count > 1;
    if (multi) plot.series.push_back({"mean", mean_curve(records), "", false, false});
    plot.series.push_back({"bound", bound_curve(records), "#000000", true, false});
    return io::render_svg(plot);
}

}  // namespace

const std::vector<std::string>& panel_names() {
    static const std::vector<std::string> names{"fig1a", "fig1b", "fig1c", "fig2a", "fig2b", "fig2c", "fig2d"};
    return names;
}

PanelOutput run_panel(std::string_view panel, const PanelOptions& opts) {
    PanelOutput out;
    if (panel == "fig1a") {
        out = fig1a(opts);
    } else if (panel == "fig1b") {
        out = fig1b(opts);
    } else if (panel == "fig1c") {
        out = fig1c(opts);
    } else if (panel == "fig2a") {
        out = single_decoder_panel("fig2a", "sqrt", SweepMode::WorstCase, "sqrt decoder: worst case", opts);
    } else if (panel == "fig2b") {
        out = single_decoder_panel("fig2b", "exp", SweepMode::WorstCase, "exp decoder: worst case", opts);
    } else if (panel == "fig2c") {
        out = single_decoder_panel("fig2c", "sqrt", SweepMode::Singularity, "sqrt decoder at r = 0", opts);
    } else if (panel == "fig2d") {
        out = fig2d(opts);
    } else {
        throw ConfigError("panel", "unknown panel '" + std::string(panel) + "'");
    }
    // Summary goes right after the CSVs, before any figure.
    const auto first_svg = std::find_if(out.files.begin(), out.files.end(), [](const PanelFile& f) {
        return f.name.size() > 4 && f.name.ends_with(".svg");
    });
    out.files.insert(first_svg, PanelFile{std::string(panel) + "_fit.json", out.summary.dump(2) + "\n"});
    return out;
}

std::string gap_figure(const std::string& csv, const std::string& title) {
    return figure_from_records(io::parse_trials_csv(csv), title);
}

std::string ratio_figure(const std::string& csv, const std::string& title) {
    const auto records = io::parse_trials_csv(csv);
    Points ratio;
    for (const auto& [n, p] : summarize(records)) {
        if (!(p.bound > 0.0) || !std::isfinite(p.bound)) return {};
        ratio.emplace_back(static_cast<double>(n), p.max / p.bound);
    }
    if (ratio.empty()) return {};
    io::PlotSpec plot{title, "context size n", "max gap / bound", true, false, {}};
    plot.series.push_back({"gap / bound", ratio, "", false, false});
    return io::render_svg(plot);
}

}  // namespace cnpgap
