#include "cnpgap/model.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cnpgap/errors.hpp"

namespace cnpgap {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

void require_finite(std::span<const double> v, const char* what) {
    for (double e : v) {
        if (!std::isfinite(e)) throw DomainError(std::string(what) + " has a non-finite coordinate");
    }
}

void require_finite_point(const ContextPoint& p) {
    require_finite(p.x, "context input x");
    if (!std::isfinite(p.y)) throw DomainError("context output y is non-finite");
}

double sigmoid(double z) {
    // Split on sign so exp never overflows.
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

}  // namespace

ContextSet::ContextSet(std::vector<ContextPoint> points) : points_(std::move(points)) {
    for (const auto& p : points_) require_finite_point(p);
}

void ContextSet::add(ContextPoint p) {
    require_finite_point(p);
    points_.push_back(std::move(p));
}

ContextSet ContextSet::augmented(ContextPoint p) const {
    ContextSet out = *this;
    out.add(std::move(p));
    return out;
}

// ---------------------------------------------------------------------------

double encoder_bound(const EncoderSpec& enc) {
    return std::visit([](const auto& e) { return e.bound; }, enc);
}

std::size_t encoder_dim(const EncoderSpec& enc) {
    return std::visit(overloaded{
                          [](const SignEncoder&) -> std::size_t { return 1; },
                          [](const BoundedTanhEncoder& e) -> std::size_t { return e.b.size(); },
                      },
                      enc);
}

void validate(const EncoderSpec& enc) {
    const double bound = encoder_bound(enc);
    if (!(bound > 0.0) || !std::isfinite(bound)) throw DomainError("encoder bound B_h must be positive and finite");
    if (const auto* t = std::get_if<BoundedTanhEncoder>(&enc)) {
        const std::size_t d = t->b.size();
        if (d == 0) throw DomainError("tanh encoder needs at least one output dimension");
        if (t->a.size() != d || t->c.size() != d) {
            throw DomainError("tanh encoder weight shapes disagree (a rows, b, c must all have length d)");
        }
        for (const auto& row : t->a) require_finite(row, "tanh encoder weight a");
        require_finite(t->b, "tanh encoder weight b");
        require_finite(t->c, "tanh encoder weight c");
    }
}

Vector encode(const EncoderSpec& enc, std::span<const double> x, double y) {
    require_finite(x, "input x");
    if (!std::isfinite(y)) throw DomainError("output y is non-finite");
    return std::visit(overloaded{
                          [&](const SignEncoder& e) { return Vector{y < 0.0 ? -e.bound : e.bound}; },
                          [&](const BoundedTanhEncoder& e) {
                              const std::size_t d = e.b.size();
                              const double scale = e.bound / std::sqrt(static_cast<double>(d));
                              Vector h(d);
                              for (std::size_t j = 0; j < d; ++j) {
                                  const auto& row = e.a[j];
                                  if (row.size() != x.size()) {
                                      throw DomainError("tanh encoder expects inputs of dimension " +
                                                        std::to_string(row.size()));
                                  }
                                  double z = e.b[j] * y + e.c[j];
                                  for (std::size_t i = 0; i < x.size(); ++i) z += row[i] * x[i];
                                  h[j] = scale * std::tanh(z);
                              }
                              return h;
                          },
                      },
                      enc);
}

Representation aggregate(const EncoderSpec& enc, const ContextSet& ctx) {
    if (ctx.empty()) throw EmptyContextError();
    Vector sum(encoder_dim(enc), 0.0);
    for (const auto& p : ctx.points()) {
        const Vector h = encode(enc, p.x, p.y);
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += h[j];
    }
    const double n = static_cast<double>(ctx.size());
    for (double& s : sum) s /= n;
    return Representation{std::move(sum), ctx.size()};
}

Vector representation_shift(const Representation& r, std::span<const double> h_new) {
    if (r.source_n == 0) throw EmptyContextError();
    if (h_new.size() != r.r.size()) throw DomainError("encoding dimension does not match representation");
    const double denom = static_cast<double>(r.source_n) + 1.0;
    Vector delta(r.r.size());
    for (std::size_t j = 0; j < delta.size(); ++j) delta[j] = (h_new[j] - r.r[j]) / denom;
    return delta;
}

Representation augment_representation(const Representation& r, std::span<const double> h_new) {
    const Vector delta = representation_shift(r, h_new);
    Representation out{r.r, r.source_n + 1};
    for (std::size_t j = 0; j < delta.size(); ++j) out.r[j] += delta[j];
    return out;
}

double euclidean_norm(std::span<const double> v) {
    double s = 0.0;
    for (double e : v) s += e * e;
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------

double ScalarDecoder::mean_at(double r) const {
    switch (mean) {
        case MeanFn::Linear: return slope * r;
        case MeanFn::Tanh: return std::tanh(r);
        case MeanFn::Sinusoidal: return std::sin(r);
        case MeanFn::Relu: return r > 0.0 ? r : 0.0;
        case MeanFn::Elu: return r > 0.0 ? r : std::expm1(r);
        case MeanFn::Cubic: return r * r * r;
        case MeanFn::LogContractive: return std::copysign(std::log1p(std::abs(r)), r);
        case MeanFn::Sqrt: return std::copysign(std::sqrt(std::abs(r)), r);
        case MeanFn::Exp: return std::exp(r);
        case MeanFn::SteepSigmoid: return sigmoid(steepness * r);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double ScalarDecoder::std_at(double r) const {
    switch (variance) {
        case VarianceFn::Constant: return sigma_min;
        case VarianceFn::Sigmoid: return sigma_min + sigmoid(r);
        case VarianceFn::AbsDistance: return sigma_min + var_slope * std::abs(r - var_center);
    }
    return std::numeric_limits<double>::quiet_NaN();
}

void validate(const DecoderSpec& dec) {
    std::visit(overloaded{
                   [](const LinearDecoder& d) {
                       if (d.weights.empty()) throw DomainError("linear decoder needs at least one weight");
                       require_finite(d.weights, "linear decoder weights");
                       if (!(d.sigma > 0.0) || !std::isfinite(d.sigma)) {
                           throw DomainError("linear decoder sigma must be positive and finite");
                       }
                   },
                   [](const ScalarDecoder& d) {
                       if (!(d.sigma_min > 0.0) || !std::isfinite(d.sigma_min)) {
                           throw DomainError("sigma_min must be positive and finite");
                       }
                       if (!(d.var_slope >= 0.0)) throw DomainError("L_sigma must be non-negative");
                       if (!(d.domain_bound > 0.0)) throw DomainError("decoder domain bound must be positive");
                       if (d.mean == MeanFn::SteepSigmoid && !(d.steepness > 0.0)) {
                           throw DomainError("steep sigmoid needs k > 0");
                       }
                       if (!std::isfinite(d.slope) || !std::isfinite(d.var_center) || !std::isfinite(d.steepness)) {
                           throw DomainError("decoder parameters must be finite");
                       }
                   },
               },
               dec);
}

DecoderConstants declared_constants(const DecoderSpec& dec) {
    return std::visit(
        overloaded{
            [](const LinearDecoder& d) { return DecoderConstants{euclidean_norm(d.weights), 0.0, d.sigma}; },
            [](const ScalarDecoder& d) {
                double l_mu = 1.0;
                switch (d.mean) {
                    case MeanFn::Linear: l_mu = std::abs(d.slope); break;
                    case MeanFn::Tanh:
                    case MeanFn::Sinusoidal:
                    case MeanFn::Relu:
                    case MeanFn::Elu:
                    case MeanFn::LogContractive: l_mu = 1.0; break;
                    case MeanFn::Cubic: l_mu = 3.0 * d.domain_bound * d.domain_bound; break;
                    case MeanFn::Sqrt: l_mu = std::numeric_limits<double>::infinity(); break;
                    case MeanFn::Exp: l_mu = std::exp(d.domain_bound); break;
                    case MeanFn::SteepSigmoid: l_mu = d.steepness / 4.0; break;
                }
                double l_sigma = 0.0;
                switch (d.variance) {
                    case VarianceFn::Constant: l_sigma = 0.0; break;
                    case VarianceFn::Sigmoid: l_sigma = 0.25; break;
                    case VarianceFn::AbsDistance: l_sigma = d.var_slope; break;
                }
                return DecoderConstants{l_mu, l_sigma, d.sigma_min};
            },
        },
        dec);
}

bool globally_lipschitz(const DecoderSpec& dec) {
    const auto* d = std::get_if<ScalarDecoder>(&dec);
    if (d == nullptr) return true;
    return d->mean != MeanFn::Sqrt && d->mean != MeanFn::Exp;
}

GaussianPredictive predict(const DecoderSpec& dec, std::span<const double> x_target, const Representation& r) {
    require_finite(x_target, "target input");
    require_finite(r.r, "representation");
    return std::visit(overloaded{
                          [&](const LinearDecoder& d) {
                              if (d.weights.size() != r.r.size()) {
                                  throw DomainError("linear decoder weight dimension does not match representation");
                              }
                              double mu = 0.0;
                              for (std::size_t j = 0; j < r.r.size(); ++j) mu += d.weights[j] * r.r[j];
                              return GaussianPredictive(mu, d.sigma);
                          },
                          [&](const ScalarDecoder& d) {
                              if (r.r.size() != 1) throw DomainError("catalog decoders take scalar representations");
                              const double s = d.std_at(r.r[0]);
                              if (!(s > 0.0)) throw DomainError("decoder variance function returned a non-positive std");
                              return GaussianPredictive(d.mean_at(r.r[0]), s);
                          },
                      },
                      dec);
}

std::vector<GaussianPredictive> joint_predict(const DecoderSpec& dec, const std::vector<Vector>& targets,
                                              const Representation& r) {
    if (targets.empty()) throw DomainError("joint prediction needs at least one target");
    std::vector<GaussianPredictive> out;
    out.reserve(targets.size());
    for (const auto& x : targets) out.push_back(predict(dec, x, r));
    return out;
}

// ---------------------------------------------------------------------------

std::string_view mean_fn_name(MeanFn f) {
    switch (f) {
        case MeanFn::Linear: return "linear";
        case MeanFn::Tanh: return "tanh";
        case MeanFn::Sinusoidal: return "sinusoidal";
        case MeanFn::Relu: return "relu";
        case MeanFn::Elu: return "elu";
        case MeanFn::Cubic: return "cubic";
        case MeanFn::LogContractive: return "log_contractive";
        case MeanFn::Sqrt: return "sqrt";
        case MeanFn::Exp: return "exp";
        case MeanFn::SteepSigmoid: return "steep_sigmoid";
    }
    return "?";
}

std::string_view variance_fn_name(VarianceFn f) {
    switch (f) {
        case VarianceFn::Constant: return "constant";
        case VarianceFn::Sigmoid: return "sigmoid";
        case VarianceFn::AbsDistance: return "abs_distance";
    }
    return "?";
}

std::optional<MeanFn> parse_mean_fn(std::string_view name) {
    for (MeanFn f : {MeanFn::Linear, MeanFn::Tanh, MeanFn::Sinusoidal, MeanFn::Relu, MeanFn::Elu, MeanFn::Cubic,
                     MeanFn::LogContractive, MeanFn::Sqrt, MeanFn::Exp, MeanFn::SteepSigmoid}) {
        if (mean_fn_name(f) == name) return f;
    }
    return std::nullopt;
}

std::optional<VarianceFn> parse_variance_fn(std::string_view name) {
    for (VarianceFn f : {VarianceFn::Constant, VarianceFn::Sigmoid, VarianceFn::AbsDistance}) {
        if (variance_fn_name(f) == name) return f;
    }
    return std::nullopt;
}

std::optional<ScalarDecoder> catalog_decoder(std::string_view name, const CatalogParams& p) {
    ScalarDecoder d;
    d.sigma_min = p.sigma_min;
    d.domain_bound = p.bound;
    if (name == "tanh") {
        d.mean = MeanFn::Tanh;
    } else if (name == "sinusoidal") {
        d.mean = MeanFn::Sinusoidal;
    } else if (name == "relu") {
        d.mean = MeanFn::Relu;
    } else if (name == "elu_sigvar") {
        d.mean = MeanFn::Elu;
        d.variance = VarianceFn::Sigmoid;
    } else if (name == "cubic") {
        d.mean = MeanFn::Cubic;
    } else if (name == "log_contractive") {
        d.mean = MeanFn::LogContractive;
    } else if (name == "sqrt") {
        d.mean = MeanFn::Sqrt;
    } else if (name == "exp") {
        d.mean = MeanFn::Exp;
    } else if (name == "steep_sigmoid") {
        d.mean = MeanFn::SteepSigmoid;
        d.steepness = p.steepness;
    } else if (name == "tight_lipschitz") {
        d.mean = MeanFn::Linear;
        d.slope = p.lipschitz_mean;
        d.variance = VarianceFn::AbsDistance;
        d.var_slope = p.lipschitz_std;
        d.var_center = p.var_center;
    } else {
        return std::nullopt;
    }
    return d;
}

const std::vector<std::string>& lipschitz_catalog_names() {
    static const std::vector<std::string> names{"tanh",  "sinusoidal", "relu",
                                                "elu_sigvar", "cubic", "log_contractive"};
    return names;
}

}  // namespace cnpgap
