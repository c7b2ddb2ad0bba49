#include "cnpgap/gap.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cnpgap/errors.hpp"

namespace cnpgap {

namespace {

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << name << " must be positive and finite (got " << v << ")";
        throw DomainError(os.str());
    }
}

void require_nonnegative(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
        std::ostringstream os;
        os << name << " must be non-negative and finite (got " << v << ")";
        throw DomainError(os.str());
    }
}

void require_context_size(std::size_t n) {
    if (n == 0) throw EmptyContextError();
}

double squared(double v) { return v * v; }

}  // namespace

GapResult gap_from_representation(const DecoderSpec& dec, const Representation& r, std::span<const double> h_new,
                                  std::span<const double> x_target) {
    const Representation r_plus = augment_representation(r, h_new);
    const GaussianPredictive p_c = predict(dec, x_target, r);
    const GaussianPredictive p_cplus = predict(dec, x_target, r_plus);

    GapResult out;
    out.delta = kl_gaussian(p_cplus, p_c);
    out.mu_c = p_c.mean();
    out.mu_cplus = p_cplus.mean();
    out.sigma_c = p_c.std();
    out.sigma_cplus = p_cplus.std();
    out.delta_r = representation_shift(r, h_new);
    out.n = r.source_n;
    return out;
}

GapResult consistency_gap(const EncoderSpec& enc, const DecoderSpec& dec, const ContextSet& ctx,
                          const ContextPoint& new_point, std::span<const double> x_target) {
    const Representation r = aggregate(enc, ctx);
    const Vector h_new = encode(enc, new_point.x, new_point.y);
    return gap_from_representation(dec, r, h_new, x_target);
}

double gap_linear_exact(const DecoderSpec& dec, std::span<const double> w_at_target, std::span<const double> h_new,
                        const Representation& r) {
    const auto* linear = std::get_if<LinearDecoder>(&dec);
    if (linear == nullptr) throw DomainError("gap_linear_exact requires a constant-variance linear decoder");
    require_context_size(r.source_n);
    if (w_at_target.size() != r.r.size() || h_new.size() != r.r.size()) {
        throw DomainError("dimension mismatch between weight, encoding and representation");
    }
    double projected = 0.0;
    for (std::size_t j = 0; j < r.r.size(); ++j) projected += w_at_target[j] * (h_new[j] - r.r[j]);
    const double np1 = static_cast<double>(r.source_n) + 1.0;
    return squared(projected) / (2.0 * squared(linear->sigma) * squared(np1));
}

BoundEvaluation bound_linear(double b_w, double b_h, double sigma, std::size_t n) {
    require_positive(b_w, "B_W");
    require_positive(b_h, "B_h");
    require_positive(sigma, "sigma");
    require_context_size(n);
    const double np1 = static_cast<double>(n) + 1.0;
    BoundEvaluation out;
    out.bound = 2.0 * squared(b_w) * squared(b_h) / (squared(sigma) * squared(np1));
    out.regime_valid = true;
    out.constants = BoundConstants{BoundKind::Linear, b_w, 0.0, b_h, sigma, n};
    return out;
}

BoundEvaluation bound_lipschitz(double l_mu, double l_sigma, double b_h, double sigma_min, std::size_t n) {
    require_positive(sigma_min, "sigma_min");
    require_positive(b_h, "B_h");
    require_nonnegative(l_mu, "L_mu");
    require_nonnegative(l_sigma, "L_sigma");
    require_context_size(n);
    const double np1 = static_cast<double>(n) + 1.0;
    BoundEvaluation out;
    out.bound = 2.0 * (squared(l_mu) + 2.0 * squared(l_sigma)) * squared(b_h) / (squared(sigma_min) * squared(np1));
    out.regime_valid = static_cast<double>(n) > 4.0 * l_sigma * b_h / sigma_min;
    out.constants = BoundConstants{BoundKind::Lipschitz, l_mu, l_sigma, b_h, sigma_min, n};
    return out;
}

double lipschitz_slack(std::size_t n) { return 1.0 + 10.0 / static_cast<double>(n); }

std::size_t min_context_for_eps(double b_w, double b_h, double sigma, double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be positive and finite");
    require_positive(b_w, "B_W");
    require_positive(b_h, "B_h");
    require_positive(sigma, "sigma");

    // n > sqrt(2 B_W^2 B_h^2 / (sigma^2 eps)) - 1, then settle rounding at the
    // integer boundary against the bound itself.
    const double threshold = std::sqrt(2.0 * squared(b_w) * squared(b_h) / (squared(sigma) * eps)) - 1.0;
    if (!std::isfinite(threshold) || threshold > 1e15) throw DomainError("eps too small: required n overflows");
    std::size_t n = threshold < 1.0 ? 1 : static_cast<std::size_t>(std::floor(threshold)) + 1;
    while (bound_linear(b_w, b_h, sigma, n).bound >= eps) ++n;
    while (n > 1 && bound_linear(b_w, b_h, sigma, n - 1).bound < eps) --n;
    return n;
}

BoundEvaluation bound_for(const EncoderSpec& enc, const DecoderSpec& dec, std::size_t n) {
    const double b_h = encoder_bound(enc);
    if (const auto* linear = std::get_if<LinearDecoder>(&dec)) {
        const double b_w = euclidean_norm(linear->weights);
        if (b_w == 0.0) {
            BoundEvaluation zero;
            zero.constants = BoundConstants{BoundKind::Linear, 0.0, 0.0, b_h, linear->sigma, n};
            return zero;
        }
        return bound_linear(b_w, b_h, linear->sigma, n);
    }
    const DecoderConstants c = declared_constants(dec);
    if (!std::isfinite(c.lipschitz_mean)) {
        BoundEvaluation unbounded;
        unbounded.bound = std::numeric_limits<double>::infinity();
        unbounded.regime_valid = static_cast<double>(n) > 4.0 * c.lipschitz_std * b_h / c.sigma_min;
        unbounded.constants = BoundConstants{BoundKind::Lipschitz, c.lipschitz_mean, c.lipschitz_std, b_h,
                                             c.sigma_min, n};
        return unbounded;
    }
    return bound_lipschitz(c.lipschitz_mean, c.lipschitz_std, b_h, c.sigma_min, n);
}

GapResult WorstCaseInstance::evaluate() const {
    return consistency_gap(encoder, decoder, context, new_point, target);
}

ContextSet negative_context(std::size_t n) {
    std::vector<ContextPoint> pts;
    pts.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) {
        pts.push_back(ContextPoint{{static_cast<double>(i) / static_cast<double>(n)}, -1.0, std::nullopt});
    }
    return ContextSet(std::move(pts));
}

WorstCaseInstance construct_worstcase_linear(double b_w, double b_h, double sigma, std::size_t n, double target) {
    const BoundEvaluation bound = bound_linear(b_w, b_h, sigma, n);
    return WorstCaseInstance{
        SignEncoder{b_h},
        LinearDecoder{{b_w}, sigma},
        negative_context(n),
        ContextPoint{{0.5}, 1.0, std::nullopt},
        {target},
        bound.bound,
    };
}

WorstCaseInstance construct_worstcase_lipschitz(double l_mu, double l_sigma, double b_h, double sigma_min,
                                                std::size_t n, double target) {
    const BoundEvaluation bound = bound_lipschitz(l_mu, l_sigma, b_h, sigma_min, n);
    CatalogParams params;
    params.sigma_min = sigma_min;
    params.bound = b_h;
    params.lipschitz_mean = l_mu;
    params.lipschitz_std = l_sigma;
    params.var_center = -b_h;
    return WorstCaseInstance{
        SignEncoder{b_h},
        *catalog_decoder("tight_lipschitz", params),
        negative_context(n),
        ContextPoint{{0.5}, 1.0, std::nullopt},
        {target},
        bound.bound,
    };
}

}  // namespace cnpgap
