#include <doctest.h>

#include <cmath>
#include <random>

#include "cnpgap/errors.hpp"
#include "cnpgap/gaussian.hpp"
#include "oracles.hpp"

using namespace cnpgap;

TEST_CASE("GaussianPredictive rejects invalid parameters") {
    CHECK_THROWS_AS(GaussianPredictive(0.0, 0.0), DomainError);
    CHECK_THROWS_AS(GaussianPredictive(0.0, -1.0), DomainError);
    CHECK_THROWS_AS(GaussianPredictive(NAN, 1.0), DomainError);
    CHECK_THROWS_AS(GaussianPredictive(0.0, INFINITY), DomainError);
    CHECK_NOTHROW(GaussianPredictive(-3.0, 1e-9));
}

TEST_CASE("kl_gaussian closed-form examples") {
    CHECK(kl_gaussian({0, 1}, {0, 1}) == 0.0);

    // Frozen from the quadrature oracle: 0.50000000000000, 0.80685281944005.
    CHECK(oracle::kl_by_quadrature(1, 1, 0, 1) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(kl_gaussian({1, 1}, {0, 1}) == doctest::Approx(0.5).epsilon(1e-14));

    CHECK(oracle::kl_by_quadrature(0, 2, 0, 1) == doctest::Approx(0.806853).epsilon(1e-6));
    CHECK(kl_gaussian({0, 2}, {0, 1}) == doctest::Approx(std::log(0.5) + 2.0 - 0.5).epsilon(1e-14));
}

TEST_CASE("kl_gaussian argument order matters") {
    const GaussianPredictive a(0, 2), b(0, 1);
    // KL(N(0,1) || N(0,4)) = log 2 + 1/8 - 1/2
    CHECK(kl_gaussian(b, a) == doctest::Approx(std::log(2.0) + 0.125 - 0.5));
    CHECK(kl_gaussian(a, b) != doctest::Approx(kl_gaussian(b, a)));
}

TEST_CASE("kl_gaussian is non-negative and vanishes only on equal inputs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> mean(-3, 3), sd(0.2, 3);
    for (int i = 0; i < 2000; ++i) {
        const GaussianPredictive p1(mean(rng), sd(rng)), p0(mean(rng), sd(rng));
        const double kl = kl_gaussian(p1, p0);
        CHECK(kl >= 0.0);
        CHECK(kl > 0.0);
        CHECK(kl_gaussian(p1, p1) == 0.0);
    }
}

TEST_CASE("kl_gaussian agrees with quadrature on random pairs") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> mean(-3, 3), sd(0.2, 3);
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double m1 = mean(rng), s1 = sd(rng), m0 = mean(rng), s0 = sd(rng);
        const double diff = std::abs(kl_gaussian({m1, s1}, {m0, s0}) - oracle::kl_by_quadrature(m1, s1, m0, s0));
        worst = std::max(worst, diff);
        CHECK(kl_gaussian({m1, s1}, {m0, s0}) == doctest::Approx(oracle::kl_textbook(m1, s1, m0, s0)).epsilon(1e-12));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("kl_quadratic_approx") {
    CHECK(kl_quadratic_approx(0, 0, 1) == 0.0);
    CHECK(kl_quadratic_approx(0.1, 0, 1) == doctest::Approx(0.005).epsilon(1e-14));
    CHECK(kl_quadratic_approx(0, 0.1, 1) == doctest::Approx(0.01).epsilon(1e-14));
    CHECK(kl_quadratic_approx(0.2, 0.1, 2) == doctest::Approx(0.04 / 8 + 0.01 / 4));

    CHECK_THROWS_AS(kl_quadratic_approx(0, 0.5, 1), DomainError);
    CHECK_THROWS_AS(kl_quadratic_approx(0, -0.6, 1), DomainError);
    CHECK_THROWS_AS(kl_quadratic_approx(0, 0, 0), DomainError);
    try {
        kl_quadratic_approx(0, 0.5, 1);
    } catch (const DomainError& e) {
        CHECK(std::string(e.what()).find("|eps_sigma| < sigma0/2") != std::string::npos);
    }
}

TEST_CASE("kl_expansion_audit") {
    const GaussianPredictive base(0, 1);

    const KlExpansion zero = kl_expansion_audit(base, 0, 0);
    CHECK(zero.remainder == 0.0);
    CHECK(zero.exact_kl == 0.0);

    const KlExpansion mean_only = kl_expansion_audit(base, 0.1, 0);
    CHECK(std::abs(mean_only.remainder) <= 1e-14);
    CHECK(mean_only.exact_kl == doctest::Approx(0.005));

    // remainder(u) = u - u^2/2 - log1p(u): -2.3215568e-3 at u = 0.2, -3.101798e-4 at 0.1.
    const KlExpansion big = kl_expansion_audit(base, 0, 0.2);
    const KlExpansion small = kl_expansion_audit(base, 0, 0.1);
    CHECK(big.remainder == doctest::Approx(-2.3215568e-3).epsilon(1e-6));
    CHECK(small.remainder == doctest::Approx(-3.101798e-4).epsilon(1e-6));
    const double shrink = big.remainder / small.remainder;
    CHECK(shrink > 7.0);
    CHECK(shrink < 9.0);

    CHECK_THROWS_AS(kl_expansion_audit(base, 0, 0.5), DomainError);
}

TEST_CASE("expansion invariants hold on random perturbations") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mean(-3, 3), sd(0.2, 3), unit(-1, 1);
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        const GaussianPredictive base(mean(rng), sd(rng));
        const double dir_mu = unit(rng);
        const double dir_sigma = 0.25 * base.std() * unit(rng);
        for (double t : {1.0, 0.5, 0.25, 0.125}) {
            const KlExpansion e = kl_expansion_audit(base, t * dir_mu, t * dir_sigma);
            CHECK(e.exact_kl >= 0.0);
            CHECK(std::abs(e.exact_kl - (e.quadratic_term + e.remainder)) <= 1e-12);
            const KlExpansion half = kl_expansion_audit(base, 0.5 * t * dir_mu, 0.5 * t * dir_sigma);
            if (std::abs(e.remainder) > 1e-13 && std::abs(half.remainder) > 1e-13) {
                const double ratio = e.remainder / half.remainder;
                CHECK(ratio >= 6.0);
                CHECK(ratio <= 10.0);
                ++checked;
            }
        }
        const KlExpansion mean_shift = kl_expansion_audit(base, dir_mu, 0.0);
        CHECK(std::abs(mean_shift.remainder) <= 1e-14);
    }
    CHECK(checked > 1000);
}

TEST_CASE("audit exact term matches kl_gaussian on the perturbed distribution") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> mean(-3, 3), sd(0.2, 3), unit(-1, 1);
    for (int i = 0; i < 300; ++i) {
        const GaussianPredictive base(mean(rng), sd(rng));
        const double e_mu = unit(rng), e_sigma = 0.45 * base.std() * unit(rng);
        const KlExpansion e = kl_expansion_audit(base, e_mu, e_sigma);
        const GaussianPredictive perturbed(base.mean() + e_mu, base.std() + e_sigma);
        CHECK(std::abs(e.exact_kl - kl_gaussian(perturbed, base)) <= 1e-12);
        CHECK(e.quadratic_term == doctest::Approx(kl_quadratic_approx(e_mu, e_sigma, base.std())));
    }
}
