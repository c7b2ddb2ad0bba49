#include <doctest.h>

#include <cmath>
#include <random>

#include "cnpgap/errors.hpp"
#include "cnpgap/model.hpp"
#include "oracles.hpp"

using namespace cnpgap;

namespace {

ContextSet context_from_ys(const std::vector<double>& ys) {
    std::vector<ContextPoint> pts;
    for (std::size_t i = 0; i < ys.size(); ++i) pts.push_back({{0.1 * static_cast<double>(i)}, ys[i], std::nullopt});
    return ContextSet(std::move(pts));
}

ScalarDecoder named(const std::string& name, double sigma_min = 1.0, double bound = 1.0) {
    CatalogParams p;
    p.sigma_min = sigma_min;
    p.bound = bound;
    p.steepness = 8.0;
    p.lipschitz_mean = 1.5;
    p.lipschitz_std = 0.7;
    p.var_center = -bound;
    return *catalog_decoder(name, p);
}

}  // namespace

TEST_CASE("sign encoder") {
    const Vector x{0.3};
    CHECK(encode(SignEncoder{1.0}, x, -0.3) == Vector{-1.0});
    CHECK(encode(SignEncoder{2.0}, x, 5.0) == Vector{2.0});
    CHECK(encode(SignEncoder{2.0}, x, 0.0) == Vector{2.0});  // sign(0) -> +1
    CHECK_THROWS_AS(encode(SignEncoder{1.0}, x, NAN), DomainError);
}

TEST_CASE("bounded tanh encoder") {
    const BoundedTanhEncoder e{1.0, {{0.0}}, {1.0}, {0.0}};
    CHECK(encode(e, Vector{0.7}, 0.0) == Vector{0.0});
    CHECK(encode(e, Vector{0.7}, 1.0)[0] == doctest::Approx(std::tanh(1.0)));

    const BoundedTanhEncoder wide{3.0, {{1.0, -2.0}, {0.5, 0.5}, {0.0, 1.0}}, {4.0, -3.0, 2.0}, {0.1, 0.2, -0.3}};
    CHECK_NOTHROW(validate(EncoderSpec{wide}));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 10.0);
    for (int i = 0; i < 10000; ++i) {
        const Vector x{g(rng), g(rng)};
        CHECK(euclidean_norm(encode(wide, x, g(rng))) <= 3.0 + 1e-12);
    }
    CHECK_THROWS_AS(validate(EncoderSpec{BoundedTanhEncoder{1.0, {{1.0}}, {1.0, 2.0}, {0.0}}}), DomainError);
}

TEST_CASE("encoder bound holds on random inputs") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g(0.0, 5.0);
    for (double bound : {0.5, 1.0, 4.0}) {
        for (int i = 0; i < 10000; ++i) {
            const Vector x{g(rng)};
            CHECK(std::abs(encode(SignEncoder{bound}, x, g(rng))[0]) <= bound + 1e-12);
        }
    }
}

TEST_CASE("aggregate") {
    const SignEncoder enc{1.0};
    CHECK(aggregate(enc, context_from_ys({-1, -2, -0.5, -3, -1, -1, -7})).r == Vector{-1.0});
    CHECK(aggregate(enc, context_from_ys({-1, -2, -0.5, -3, -1, -1, -7})).source_n == 7);
    CHECK(aggregate(enc, context_from_ys({2.5})).r == Vector{1.0});
    CHECK(aggregate(enc, context_from_ys({1, 2, 3, -1, -2, -3})).r == Vector{0.0});
    CHECK_THROWS_AS(aggregate(enc, ContextSet{}), EmptyContextError);
}

TEST_CASE("aggregate mean bound and incremental agreement on random contexts") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    std::uniform_int_distribution<int> size(1, 300);
    const EncoderSpec tanh_enc = BoundedTanhEncoder{2.0, {{0.7}}, {1.3}, {-0.2}};
    for (const EncoderSpec& enc : {EncoderSpec{SignEncoder{1.5}}, tanh_enc}) {
        for (int trial = 0; trial < 200; ++trial) {
            const int n = size(rng);
            std::vector<double> ys(static_cast<std::size_t>(n));
            for (double& y : ys) y = g(rng);
            const ContextSet ctx = context_from_ys(ys);
            const Representation r = aggregate(enc, ctx);
            CHECK(euclidean_norm(r.r) <= encoder_bound(enc) + 1e-12);
            if (std::holds_alternative<SignEncoder>(enc)) {
                CHECK(r.r[0] == doctest::Approx(oracle::sign_mean(ys, 1.5)).epsilon(1e-14));
            }

            const ContextPoint extra{{0.9}, g(rng), std::nullopt};
            const Vector h_new = encode(enc, extra.x, extra.y);
            const Representation incremental = augment_representation(r, h_new);
            const Representation batch = aggregate(enc, ctx.augmented(extra));
            CHECK(incremental.source_n == batch.source_n);
            CHECK(std::abs(incremental.r[0] - batch.r[0]) <= 1e-12);

            const Vector shift = representation_shift(r, h_new);
            CHECK(euclidean_norm(shift) <= 2.0 * encoder_bound(enc) / (n + 1.0) + 1e-12);
        }
    }
}

TEST_CASE("augment_representation and representation_shift") {
    const Representation r{{-1.0}, 7};
    CHECK(augment_representation(r, Vector{1.0}).r[0] == doctest::Approx(-0.75));
    CHECK(augment_representation(r, Vector{1.0}).source_n == 8);
    CHECK(augment_representation(r, r.r).r == r.r);
    CHECK(augment_representation(Representation{{0.2}, 1}, Vector{0.6}).r[0] == doctest::Approx(0.4));

    const std::size_t n = 9;
    const double bh = 1.5;
    CHECK(representation_shift(Representation{{-bh}, n}, Vector{bh})[0] == doctest::Approx(2 * bh / (n + 1)));
    CHECK(representation_shift(r, r.r)[0] == 0.0);
    CHECK(representation_shift(Representation{{0.0}, n}, Vector{bh})[0] == doctest::Approx(bh / (n + 1)));

    CHECK_THROWS_AS(representation_shift(Representation{{0.0}, 0}, Vector{1.0}), EmptyContextError);
    CHECK_THROWS_AS(representation_shift(Representation{{0.0, 1.0}, 3}, Vector{1.0}), DomainError);
}

TEST_CASE("multi-dimensional linear decoder") {
    const EncoderSpec enc = BoundedTanhEncoder{1.0, {{1.0}, {-1.0}}, {1.0, 0.5}, {0.0, 0.0}};
    const DecoderSpec dec = LinearDecoder{{0.5, -2.0}, 0.3};
    CHECK_NOTHROW(validate(dec));
    const Representation r = aggregate(enc, context_from_ys({0.3, -1.2, 2.0}));
    CHECK(r.r.size() == 2);
    const GaussianPredictive p = predict(dec, Vector{0.0}, r);
    CHECK(p.mean() == doctest::Approx(0.5 * r.r[0] - 2.0 * r.r[1]));
    CHECK(p.std() == 0.3);
    CHECK_THROWS_AS(predict(LinearDecoder{{1.0}, 1.0}, Vector{0.0}, r), DomainError);
}

TEST_CASE("predict") {
    const GaussianPredictive linear = predict(LinearDecoder{{1.0}, 1.0}, Vector{0.0}, Representation{{-1.0}, 3});
    CHECK(linear == GaussianPredictive(-1.0, 1.0));

    CatalogParams p;
    p.sigma_min = 0.5;
    p.lipschitz_mean = 1.0;
    p.lipschitz_std = 1.0;
    p.var_center = -1.0;
    const DecoderSpec tight = *catalog_decoder("tight_lipschitz", p);
    CHECK(predict(tight, Vector{0.0}, Representation{{-1.0}, 5}) == GaussianPredictive(-1.0, 0.5));
    CHECK(predict(tight, Vector{0.0}, Representation{{0.0}, 5}) == GaussianPredictive(0.0, 1.5));

    for (const auto& name : {"tanh", "sinusoidal", "relu", "elu_sigvar", "cubic", "log_contractive", "sqrt", "exp",
                             "steep_sigmoid", "tight_lipschitz"}) {
        const DecoderSpec d = named(name);
        const Representation r{{0.37}, 4};
        CHECK(predict(d, Vector{0.1}, r) == predict(d, Vector{0.1}, r));
    }
    CHECK_THROWS_AS(predict(named("tanh"), Vector{0.0}, Representation{{0.0, 0.0}, 2}), DomainError);
}

TEST_CASE("catalog mean functions") {
    CHECK(named("tanh").mean_at(0.5) == doctest::Approx(std::tanh(0.5)));
    CHECK(named("sinusoidal").mean_at(0.5) == doctest::Approx(std::sin(0.5)));
    CHECK(named("relu").mean_at(-0.5) == 0.0);
    CHECK(named("relu").mean_at(0.5) == 0.5);
    CHECK(named("elu_sigvar").mean_at(-1.0) == doctest::Approx(std::exp(-1.0) - 1.0));
    CHECK(named("elu_sigvar").std_at(0.0) == doctest::Approx(1.5));
    CHECK(named("cubic").mean_at(-0.5) == doctest::Approx(-0.125));
    CHECK(named("log_contractive").mean_at(-1.0) == doctest::Approx(-std::log(2.0)));
    CHECK(named("sqrt").mean_at(-0.25) == doctest::Approx(-0.5));
    CHECK(named("exp").mean_at(1.0) == doctest::Approx(std::exp(1.0)));
    CHECK(named("steep_sigmoid").mean_at(0.0) == doctest::Approx(0.5));
    CHECK(named("steep_sigmoid").mean_at(-1000.0) == 0.0);
    CHECK(!catalog_decoder("nope", {}).has_value());
}

TEST_CASE("declared constants dominate finite-difference slopes and the std floor holds") {
    std::mt19937_64 rng(99);
    const double bound = 1.0;
    std::uniform_real_distribution<double> u(-bound, bound);
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 10000; ++i) pairs.emplace_back(u(rng), u(rng));
    // Pairs straddling and hugging the kinks at 0 and at r0 = -bound.
    for (int i = 1; i <= 100; ++i) {
        const double e = 1e-3 * i;
        pairs.emplace_back(-e, e);
        pairs.emplace_back(-bound, -bound + e);
    }

    std::vector<std::string> names = lipschitz_catalog_names();
    names.insert(names.end(), {"exp", "steep_sigmoid", "tight_lipschitz"});
    for (const auto& name : names) {
        CAPTURE(name);
        const ScalarDecoder d = named(name, 0.4, bound);
        const DecoderConstants c = declared_constants(d);
        const double mean_slope = oracle::max_slope([&](double r) { return d.mean_at(r); }, pairs);
        const double std_slope = oracle::max_slope([&](double r) { return d.std_at(r); }, pairs);
        CHECK(mean_slope <= c.lipschitz_mean * (1.0 + 1e-6));
        CHECK(std_slope <= c.lipschitz_std * (1.0 + 1e-6) + 1e-15);
        for (const auto& [a, b] : pairs) {
            CHECK(d.std_at(a) >= c.sigma_min);
            (void)b;
        }
    }
    CHECK(declared_constants(named("cubic", 1.0, 2.0)).lipschitz_mean == 12.0);
    CHECK(std::isinf(declared_constants(named("sqrt")).lipschitz_mean));
    CHECK(!globally_lipschitz(named("sqrt")));
    CHECK(!globally_lipschitz(named("exp")));
    CHECK(globally_lipschitz(named("tanh")));
    CHECK(declared_constants(LinearDecoder{{3.0, 4.0}, 2.0}).lipschitz_mean == 5.0);
}

TEST_CASE("decoder validation") {
    CHECK_THROWS_AS(validate(DecoderSpec{LinearDecoder{{1.0}, 0.0}}), DomainError);
    CHECK_THROWS_AS(validate(DecoderSpec{LinearDecoder{{}, 1.0}}), DomainError);
    ScalarDecoder bad = named("tanh");
    bad.sigma_min = 0.0;
    CHECK_THROWS_AS(validate(DecoderSpec{bad}), DomainError);
    bad = named("tight_lipschitz");
    bad.var_slope = -1.0;
    CHECK_THROWS_AS(validate(DecoderSpec{bad}), DomainError);
}

TEST_CASE("joint prediction factorizes and marginalizes") {
    const DecoderSpec dec = named("elu_sigvar", 0.3);
    const Representation r{{0.4}, 6};
    const std::vector<Vector> targets{{0.1}, {0.8}};
    const auto joint = joint_predict(dec, targets, r);
    REQUIRE(joint.size() == 2);
    CHECK(joint[0] == predict(dec, targets[0], r));
    CHECK(joint_predict(dec, {targets[0]}, r).front() == predict(dec, targets[0], r));
    CHECK_THROWS_AS(joint_predict(dec, {}, r), DomainError);

    // Integrating the product density over y2 recovers the y1 marginal.
    const auto& p1 = joint[0];
    const auto& p2 = joint[1];
    for (int i = 0; i < 100; ++i) {
        const double y1 = p1.mean() - 4 * p1.std() + 8 * p1.std() * i / 99.0;
        const double marginal = oracle::simpson([&](double y2) { return p1.pdf(y1) * p2.pdf(y2); },
                                                p2.mean() - 12 * p2.std(), p2.mean() + 12 * p2.std(), 4000);
        CHECK(std::abs(marginal - p1.pdf(y1)) <= 1e-6);
    }
}

TEST_CASE("context set rejects non-finite coordinates") {
    ContextSet ctx;
    CHECK_THROWS_AS(ctx.add({{NAN}, 1.0, std::nullopt}), DomainError);
    CHECK_THROWS_AS(ctx.add({{0.0}, INFINITY, std::nullopt}), DomainError);
    ctx.add({{0.0}, 1.0, "a"});
    CHECK(ctx.size() == 1);
    CHECK(ctx.augmented({{1.0}, -1.0, std::nullopt}).size() == 2);
    CHECK(ctx.size() == 1);
}
