#include "cnpgap/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <thread>

#include "cnpgap/errors.hpp"
#include "cnpgap/seeding.hpp"

namespace cnpgap {

double TrialRng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

namespace {

std::size_t input_dim(const EncoderSpec& enc) {
    if (const auto* t = std::get_if<BoundedTanhEncoder>(&enc)) return t->a.empty() ? 1 : t->a.front().size();
    return 1;
}

std::size_t decoder_dim(const DecoderSpec& dec) {
    if (const auto* l = std::get_if<LinearDecoder>(&dec)) return l->weights.size();
    return 1;
}

ContextPoint draw_point(TrialRng& rng, ContextDistribution dist, std::size_t dx) {
    ContextPoint p;
    p.x.resize(dx);
    for (double& v : p.x) v = rng.uniform();
    p.y = dist == ContextDistribution::StandardNormal ? rng.normal() : rng.uniform(-1.0, 1.0);
    return p;
}

bool use_grid_search(const SweepConfig& cfg) {
    switch (cfg.search) {
        case WorstCaseSearch::Grid: return true;
        case WorstCaseSearch::Construction: return false;
        case WorstCaseSearch::Auto:
            return std::holds_alternative<ScalarDecoder>(cfg.decoder) && globally_lipschitz(cfg.decoder) &&
                   std::get<ScalarDecoder>(cfg.decoder).variance != VarianceFn::AbsDistance;
    }
    return false;
}

TrialRecord deterministic_record(const SweepConfig& cfg, std::size_t n, double delta) {
    const BoundEvaluation b = bound_for(cfg.encoder, cfg.decoder, n);
    return TrialRecord{n, 0, delta, b.bound, 0, b.regime_valid};
}

GapResult singularity_gap(const SweepConfig& cfg, std::size_t n) {
    const ContextSet ctx = mixed_sign_context(n, n / 2);
    const ContextPoint new_point{{1.0}, 1.0, std::nullopt};
    const Vector target{cfg.target};
    return consistency_gap(cfg.encoder, cfg.decoder, ctx, new_point, target);
}

void run_size(const SweepConfig& cfg, std::size_t n, std::span<TrialRecord> out) {
    switch (cfg.mode) {
        case SweepMode::WorstCase: out[0] = deterministic_record(cfg, n, worstcase_gap(cfg, n).delta); return;
        case SweepMode::Singularity: out[0] = deterministic_record(cfg, n, singularity_gap(cfg, n).delta); return;
        case SweepMode::Random: break;
    }
    const std::size_t dx = input_dim(cfg.encoder);
    const BoundEvaluation b = bound_for(cfg.encoder, cfg.decoder, n);
    for (std::size_t t = 0; t < cfg.trials_per_n; ++t) {
        const std::uint64_t seed = trial_seed(cfg.master_seed, n, t);
        TrialRng rng(seed);
        std::vector<ContextPoint> pts;
        pts.reserve(n);
        for (std::size_t i = 0; i < n; ++i) pts.push_back(draw_point(rng, cfg.context_distribution, dx));
        const ContextPoint new_point = draw_point(rng, cfg.context_distribution, dx);
        Vector target(dx);
        for (double& v : target) v = rng.uniform();
        const GapResult g = consistency_gap(cfg.encoder, cfg.decoder, ContextSet(std::move(pts)), new_point, target);
        out[t] = TrialRecord{n, t, g.delta, b.bound, seed, b.regime_valid};
    }
}

}  // namespace

void validate(const SweepConfig& cfg) {
    if (cfg.n_min < 1) throw ConfigError("n_min", "must be >= 1");
    if (cfg.n_max < cfg.n_min) throw ConfigError("n_max", "must be >= n_min");
    if (cfg.trials_per_n < 1) throw ConfigError("trials_per_n", "must be >= 1");
    try {
        validate(cfg.encoder);
    } catch (const DomainError& e) {
        throw ConfigError("encoder", e.what());
    }
    try {
        validate(cfg.decoder);
    } catch (const DomainError& e) {
        throw ConfigError("decoder", e.what());
    }
    if (encoder_dim(cfg.encoder) != decoder_dim(cfg.decoder)) {
        throw ConfigError("decoder", "representation dimension differs from the encoder output dimension");
    }
    if (!std::isfinite(cfg.target)) throw ConfigError("target", "must be finite");
    if (cfg.mode != SweepMode::Random && !std::holds_alternative<SignEncoder>(cfg.encoder)) {
        throw ConfigError("encoder", "worstcase and singularity modes need the sign encoder");
    }
    if (cfg.mode == SweepMode::Singularity && cfg.n_min == cfg.n_max && cfg.n_min % 2 == 1) {
        throw ConfigError("n_min", "singularity mode needs at least one even context size");
    }
}

unsigned default_worker_count() {
    if (const char* env = std::getenv("CNP_GAPMETER_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::size_t> sweep_sizes(const SweepConfig& cfg) {
    std::vector<std::size_t> sizes;
    for (std::size_t n = cfg.n_min; n <= cfg.n_max; ++n) {
        if (cfg.mode == SweepMode::Singularity && n % 2 == 1) continue;
        sizes.push_back(n);
    }
    return sizes;
}

ContextSet mixed_sign_context(std::size_t n, std::size_t positives) {
    std::vector<ContextPoint> pts;
    pts.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double y = i <= positives ? 1.0 : -1.0;
        pts.push_back(ContextPoint{{static_cast<double>(i) / static_cast<double>(n)}, y, std::nullopt});
    }
    return ContextSet(std::move(pts));
}

GapResult worstcase_gap(const SweepConfig& cfg, std::size_t n) {
    const Vector target{cfg.target};
    if (!use_grid_search(cfg)) {
        return consistency_gap(cfg.encoder, cfg.decoder, negative_context(n), ContextPoint{{0.5}, 1.0, std::nullopt},
                               target);
    }
    // Grid of 101 r_C values on [-B_h, B_h], each rounded to the nearest mean a
    // size-n sign-encoded context can realize: B_h (2k - n) / n.
    constexpr int kGrid = 101;
    std::vector<std::size_t> positives;
    for (int i = 0; i < kGrid; ++i) {
        const double g = -1.0 + 2.0 * static_cast<double>(i) / (kGrid - 1);
        const double k = std::round(static_cast<double>(n) * (g + 1.0) / 2.0);
        positives.push_back(static_cast<std::size_t>(std::clamp(k, 0.0, static_cast<double>(n))));
    }
    std::sort(positives.begin(), positives.end());
    positives.erase(std::unique(positives.begin(), positives.end()), positives.end());

    std::optional<GapResult> best;
    for (std::size_t k : positives) {
        const ContextSet ctx = mixed_sign_context(n, k);
        for (double y_new : {-1.0, 1.0}) {
            GapResult g = consistency_gap(cfg.encoder, cfg.decoder, ctx, ContextPoint{{0.5}, y_new, std::nullopt},
                                          target);
            if (!best || g.delta > best->delta) best = std::move(g);
        }
    }
    return *best;
}

std::vector<TrialRecord> run_sweep(const SweepConfig& cfg, unsigned workers) {
    validate(cfg);
    const std::vector<std::size_t> sizes = sweep_sizes(cfg);
    const std::size_t per_n = cfg.mode == SweepMode::Random ? cfg.trials_per_n : 1;
    std::vector<TrialRecord> records(sizes.size() * per_n);

    if (workers == 0) workers = default_worker_count();
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(sizes.size(), 1)));

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < sizes.size(); i = next++) {
            try {
                run_size(cfg, sizes[i], std::span(records).subspan(i * per_n, per_n));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = sizes.size();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return records;
}

RateFit fit_power_law(const std::vector<TrialRecord>& records, Aggregate aggregate,
                      std::pair<std::size_t, std::size_t> n_range) {
    struct Acc {
        double max = -std::numeric_limits<double>::infinity();
        double sum = 0.0;
        std::size_t count = 0;
    };
    std::map<std::size_t, Acc> by_n;
    for (const auto& r : records) {
        if (r.n < n_range.first || r.n > n_range.second) continue;
        Acc& a = by_n[r.n];
        a.max = std::max(a.max, r.delta);
        a.sum += r.delta;
        ++a.count;
    }

    RateFit fit;
    fit.n_range_used = n_range;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [n, a] : by_n) {
        const double v = aggregate == Aggregate::Max ? a.max : a.sum / static_cast<double>(a.count);
        if (!(v > 0.0) || !std::isfinite(v)) {
            ++fit.points_excluded;
            continue;
        }
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(v));
    }
    if (xs.size() < 5) {
        throw InsufficientDataError("need at least 5 context sizes with positive gaps in [" +
                                    std::to_string(n_range.first) + ", " + std::to_string(n_range.second) +
                                    "], found " + std::to_string(xs.size()));
    }

    const double m = static_cast<double>(xs.size());
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= m;
    mean_y /= m;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    const double slope = sxy / sxx;
    const double intercept = mean_y - slope * mean_x;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (intercept + slope * xs[i]);
        ss_res += e * e;
    }
    fit.beta = -slope;
    fit.log_intercept = intercept;
    fit.r_squared = syy > 0.0 ? std::clamp(1.0 - ss_res / syy, 0.0, 1.0) : 1.0;
    fit.points_used = xs.size();
    return fit;
}

std::vector<RatioPoint> ratio_to_bound_curve(const std::vector<TrialRecord>& records) {
    std::map<std::size_t, RatioPoint> by_n;
    for (const auto& r : records) {
        if (!(r.bound > 0.0)) {
            throw DomainError("ratio to bound needs positive bounds (n=" + std::to_string(r.n) + ")");
        }
        const double ratio = r.delta / r.bound;
        auto [it, inserted] = by_n.try_emplace(r.n, RatioPoint{r.n, ratio, r.regime_valid});
        if (!inserted) it->second.ratio = std::max(it->second.ratio, ratio);
    }
    std::vector<RatioPoint> out;
    out.reserve(by_n.size());
    for (const auto& [n, p] : by_n) out.push_back(p);
    return out;
}

std::vector<TrialRecord> steep_sigmoid_sweep(double k, std::pair<std::size_t, std::size_t> n_range,
                                             double sigma_min, double b_h, unsigned workers) {
    if (!(k > 0.0)) throw DomainError("steep sigmoid scan needs k > 0");
    CatalogParams params;
    params.sigma_min = sigma_min;
    params.bound = b_h;
    params.steepness = k;
    SweepConfig cfg;
    cfg.n_min = n_range.first;
    cfg.n_max = n_range.second;
    cfg.trials_per_n = 1;
    cfg.encoder = SignEncoder{b_h};
    cfg.decoder = *catalog_decoder("steep_sigmoid", params);
    cfg.mode = SweepMode::Singularity;
    return run_sweep(cfg, workers);
}

std::vector<SteepSigmoidFit> steep_sigmoid_scan(const std::vector<double>& k_values,
                                                std::pair<std::size_t, std::size_t> n_range, double sigma_min,
                                                double b_h, unsigned workers) {
    std::vector<SteepSigmoidFit> out;
    out.reserve(k_values.size());
    for (double k : k_values) {
        const RateFit fit = fit_power_law(steep_sigmoid_sweep(k, n_range, sigma_min, b_h, workers), Aggregate::Max,
                                          n_range);
        out.push_back(SteepSigmoidFit{k, fit, std::exp(fit.log_intercept)});
    }
    return out;
}

std::string_view mode_name(SweepMode m) {
    switch (m) {
        case SweepMode::Random: return "random";
        case SweepMode::WorstCase: return "worstcase";
        case SweepMode::Singularity: return "singularity";
    }
    return "?";
}

std::string_view distribution_name(ContextDistribution d) {
    switch (d) {
        case ContextDistribution::StandardNormal: return "standard_normal";
        case ContextDistribution::Uniform: return "uniform";
    }
    return "?";
}

std::string_view search_name(WorstCaseSearch s) {
    switch (s) {
        case WorstCaseSearch::Auto: return "auto";
        case WorstCaseSearch::Grid: return "grid";
        case WorstCaseSearch::Construction: return "construction";
    }
    return "?";
}

std::optional<SweepMode> parse_mode(std::string_view s) {
    for (auto m : {SweepMode::Random, SweepMode::WorstCase, SweepMode::Singularity}) {
        if (mode_name(m) == s) return m;
    }
    return std::nullopt;
}

std::optional<ContextDistribution> parse_distribution(std::string_view s) {
    for (auto d : {ContextDistribution::StandardNormal, ContextDistribution::Uniform}) {
        if (distribution_name(d) == s) return d;
    }
    return std::nullopt;
}

std::optional<WorstCaseSearch> parse_search(std::string_view s) {
    for (auto v : {WorstCaseSearch::Auto, WorstCaseSearch::Grid, WorstCaseSearch::Construction}) {
        if (search_name(v) == s) return v;
    }
    return std::nullopt;
}

}  // namespace cnpgap
