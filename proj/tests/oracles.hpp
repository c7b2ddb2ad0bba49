#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's KL or aggregation code.

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

/// Composite Simpson rule with an even number of intervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals) {
    if (intervals % 2 == 1) ++intervals;
    const double h = (b - a) / intervals;
    double sum = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
    return sum * h / 3.0;
}

inline double normal_log_pdf(double y, double mean, double std) {
    const double z = (y - mean) / std;
    return -0.5 * z * z - std::log(std) - 0.5 * std::log(2.0 * std::numbers::pi);
}

/// KL(N(m1, s1^2) || N(m0, s0^2)) = int p1 log(p1/p0) over m1 +- 12 s1.
inline double kl_by_quadrature(double m1, double s1, double m0, double s0, int intervals = 20000) {
    auto integrand = [&](double y) {
        const double l1 = normal_log_pdf(y, m1, s1);
        const double l0 = normal_log_pdf(y, m0, s0);
        return std::exp(l1) * (l1 - l0);
    };
    return simpson(integrand, m1 - 12.0 * s1, m1 + 12.0 * s1, intervals);
}

/// Textbook closed form, written out term by term.
inline double kl_textbook(double m1, double s1, double m0, double s0) {
    return std::log(s0 / s1) + (s1 * s1 + (m1 - m0) * (m1 - m0)) / (2.0 * s0 * s0) - 0.5;
}

/// Largest |f(a) - f(b)| / |a - b| over the given pairs.
inline double max_slope(const std::function<double(double)>& f, const std::vector<std::pair<double, double>>& pairs) {
    double best = 0.0;
    for (const auto& [a, b] : pairs) {
        if (a == b) continue;
        best = std::max(best, std::abs(f(a) - f(b)) / std::abs(a - b));
    }
    return best;
}

/// Mean of sign encodings computed directly from the outputs.
inline double sign_mean(const std::vector<double>& ys, double bound) {
    double s = 0.0;
    for (double y : ys) s += (y < 0.0 ? -bound : bound);
    return s / static_cast<double>(ys.size());
}

}  // namespace oracle
