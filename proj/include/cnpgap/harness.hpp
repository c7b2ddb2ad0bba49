#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "cnpgap/gap.hpp"
#include "cnpgap/model.hpp"

namespace cnpgap {

enum class SweepMode { Random, WorstCase, Singularity };

/// Draw for the random-trial context and new point: x ~ U[0,1]^{d_x} and
///   StandardNormal: y ~ N(0, 1)
///   Uniform:        y ~ U[-1, 1]
enum class ContextDistribution { StandardNormal, Uniform };

/// How worst-case mode places (r_C, h_*).
///   Construction: all-negative context, positive new point.
///   Grid: max over a 101-point grid of achievable r_C and h_* = +-B_h.
///   Auto: Grid for globally Lipschitz catalog decoders, Construction otherwise.
enum class WorstCaseSearch { Auto, Grid, Construction };

struct SweepConfig {
    std::size_t n_min = 2;
    std::size_t n_max = 300;
    std::size_t trials_per_n = 300;
    std::uint64_t master_seed = 0;
    EncoderSpec encoder = SignEncoder{1.0};
    DecoderSpec decoder = LinearDecoder{{1.0}, 1.0};
    ContextDistribution context_distribution = ContextDistribution::StandardNormal;
    SweepMode mode = SweepMode::Random;
    WorstCaseSearch search = WorstCaseSearch::Auto;
    double target = 0.0;  // x_dagger for the deterministic modes
};

/// Throws ConfigError naming the offending field.
void validate(const SweepConfig& cfg);

struct TrialRecord {
    std::size_t n = 0;
    std::size_t trial_index = 0;
    double delta = 0.0;
    double bound = 0.0;
    std::uint64_t seed_used = 0;
    bool regime_valid = true;

    friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// Worker count: CNP_GAPMETER_THREADS when set to a positive integer,
/// otherwise the hardware concurrency.
unsigned default_worker_count();

/// Context sizes a sweep will visit (singularity mode keeps even n only).
std::vector<std::size_t> sweep_sizes(const SweepConfig& cfg);

/// Runs the sweep. Records come back sorted by (n, trial_index) and are
/// identical for any `workers` value; 0 means default_worker_count().
std::vector<TrialRecord> run_sweep(const SweepConfig& cfg, unsigned workers = 0);

/// Worst-case gap at size n for the configured search strategy.
GapResult worstcase_gap(const SweepConfig& cfg, std::size_t n);

/// Context of n points with `positives` outputs at +1 and the rest at -1.
ContextSet mixed_sign_context(std::size_t n, std::size_t positives);

enum class Aggregate { Max, Mean };

struct RateFit {
    double beta = 0.0;  // Delta ~ n^{-beta}
    double log_intercept = 0.0;
    double r_squared = 0.0;
    std::pair<std::size_t, std::size_t> n_range_used{0, 0};
    std::size_t points_used = 0;
    std::size_t points_excluded = 0;  // aggregated delta <= 0 or non-finite
};

inline constexpr std::pair<std::size_t, std::size_t> kDefaultFitRange{10, 300};

/// OLS of ln(delta_agg) on ln(n) over n in `n_range` (inclusive).
/// Throws InsufficientDataError with fewer than 5 usable sizes.
RateFit fit_power_law(const std::vector<TrialRecord>& records, Aggregate aggregate,
                      std::pair<std::size_t, std::size_t> n_range = kDefaultFitRange);

struct RatioPoint {
    std::size_t n = 0;
    double ratio = 0.0;  // max delta at n / bound at n
    bool regime_valid = true;
};

std::vector<RatioPoint> ratio_to_bound_curve(const std::vector<TrialRecord>& records);

struct SteepSigmoidFit {
    double k = 0.0;
    RateFit fit;
    double constant = 0.0;  // exp(log_intercept)
};

inline constexpr std::pair<std::size_t, std::size_t> kSteepSigmoidRange{256, 4096};

/// Balanced-context (r_C = 0) sweep of the steep sigmoid decoder for one k.
std::vector<TrialRecord> steep_sigmoid_sweep(double k, std::pair<std::size_t, std::size_t> n_range,
                                             double sigma_min, double b_h, unsigned workers = 0);

std::vector<SteepSigmoidFit> steep_sigmoid_scan(const std::vector<double>& k_values,
                                                std::pair<std::size_t, std::size_t> n_range = kSteepSigmoidRange,
                                                double sigma_min = 1.0, double b_h = 1.0, unsigned workers = 0);

std::string_view mode_name(SweepMode m);
std::string_view distribution_name(ContextDistribution d);
std::string_view search_name(WorstCaseSearch s);
std::optional<SweepMode> parse_mode(std::string_view s);
std::optional<ContextDistribution> parse_distribution(std::string_view s);
std::optional<WorstCaseSearch> parse_search(std::string_view s);

}  // namespace cnpgap
