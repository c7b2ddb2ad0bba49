#pragma once

#include <cstdint>
#include <random>

namespace cnpgap {

/// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed for trial `trial_index` at context size `n`. Depends only on its
/// arguments, so any scheduling of trials over workers sees the same streams.
constexpr std::uint64_t trial_seed(std::uint64_t master_seed, std::uint64_t n, std::uint64_t trial_index) noexcept {
    return splitmix64(splitmix64(splitmix64(master_seed) ^ n) ^ trial_index);
}

/// Per-trial random stream. Variates are derived from the raw mt19937_64 words
/// directly (the standard distributions are implementation-defined), which
/// keeps sweep output identical across standard libraries.
class TrialRng {
public:
    explicit TrialRng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cnpgap
