#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cnpgap/gaussian.hpp"

namespace cnpgap {

using Vector = std::vector<double>;

struct ContextPoint {
    Vector x;
    double y = 0.0;
    std::optional<std::string> label;
};

/// Ordered context set C = {(x_i, y_i)}. Coordinates are checked for
/// finiteness on insertion; emptiness is only rejected when a representation
/// is requested.
class ContextSet {
public:
    ContextSet() = default;
    explicit ContextSet(std::vector<ContextPoint> points);

    void add(ContextPoint p);
    /// C+ = C with `p` appended.
    ContextSet augmented(ContextPoint p) const;

    std::size_t size() const noexcept { return points_.size(); }
    bool empty() const noexcept { return points_.empty(); }
    const std::vector<ContextPoint>& points() const noexcept { return points_; }

private:
    std::vector<ContextPoint> points_;
};

// ---------------------------------------------------------------------------
// Encoders

/// h(x, y) = B_h * sign(y), with sign(0) taken as +1.
struct SignEncoder {
    double bound = 1.0;
};

/// h_j(x, y) = (B_h / sqrt(d)) * tanh(a_j . x + b_j * y + c_j), j = 1..d.
struct BoundedTanhEncoder {
    double bound = 1.0;
    std::vector<Vector> a;  // d rows, each of length d_x
    Vector b;               // d
    Vector c;               // d
};

using EncoderSpec = std::variant<SignEncoder, BoundedTanhEncoder>;

double encoder_bound(const EncoderSpec& enc);
std::size_t encoder_dim(const EncoderSpec& enc);
void validate(const EncoderSpec& enc);

// ---------------------------------------------------------------------------
// Decoders

/// mu(x, r) = W^T r with x-independent W, constant std sigma. With a fixed
/// weight vector this is also the concatenation form W^T [r; x] restricted to
/// its r-block, since the x-block cancels when comparing two contexts at the
/// same target.
struct LinearDecoder {
    Vector weights;
    double sigma = 1.0;
};

enum class MeanFn {
    Linear,          // slope * r
    Tanh,            // tanh(r)
    Sinusoidal,      // sin(r)
    Relu,            // max(0, r)
    Elu,             // r for r > 0, e^r - 1 otherwise
    Cubic,           // r^3 on [-B_h, B_h]
    LogContractive,  // sign(r) log(1 + |r|)
    Sqrt,            // sign(r) sqrt(|r|), unbounded slope at 0
    Exp,             // e^r, Lipschitz only on bounded domains
    SteepSigmoid,    // 1 / (1 + e^{-k r})
};

enum class VarianceFn {
    Constant,     // sigma_min
    Sigmoid,      // sigma_min + 1 / (1 + e^{-r})
    AbsDistance,  // sigma_min + L_sigma |r - r0|
};

/// Scalar-representation decoder drawn from the analytic catalog.
struct ScalarDecoder {
    MeanFn mean = MeanFn::Tanh;
    VarianceFn variance = VarianceFn::Constant;
    double sigma_min = 1.0;
    double slope = 1.0;         // MeanFn::Linear
    double steepness = 1.0;     // MeanFn::SteepSigmoid (k)
    double var_slope = 0.0;     // VarianceFn::AbsDistance (L_sigma)
    double var_center = 0.0;    // VarianceFn::AbsDistance (r0)
    double domain_bound = 1.0;  // representation domain [-B, B] for Cubic/Exp constants

    double mean_at(double r) const;
    double std_at(double r) const;
};

using DecoderSpec = std::variant<LinearDecoder, ScalarDecoder>;

void validate(const DecoderSpec& dec);

/// Declared theory constants. For the linear decoder L_mu = ||W|| = B_W and
/// L_sigma = 0. Sqrt reports +inf for L_mu.
struct DecoderConstants {
    double lipschitz_mean;
    double lipschitz_std;
    double sigma_min;
};

DecoderConstants declared_constants(const DecoderSpec& dec);

/// Whether the mean has a finite global Lipschitz constant over the whole
/// real line (Exp and Sqrt do not).
bool globally_lipschitz(const DecoderSpec& dec);

std::string_view mean_fn_name(MeanFn f);
std::string_view variance_fn_name(VarianceFn f);
std::optional<MeanFn> parse_mean_fn(std::string_view name);
std::optional<VarianceFn> parse_variance_fn(std::string_view name);

/// Named catalog decoders:
///   tanh, sinusoidal, relu, elu_sigvar, cubic, log_contractive  (Lipschitz)
///   sqrt, exp, steep_sigmoid                                     (boundary)
///   tight_lipschitz: mean L_mu r, std sigma_min + L_sigma |r - r0|
struct CatalogParams {
    double sigma_min = 1.0;
    double bound = 1.0;  // B_h, the representation domain
    double steepness = 1.0;
    double lipschitz_mean = 1.0;
    double lipschitz_std = 0.0;
    double var_center = 0.0;
};

std::optional<ScalarDecoder> catalog_decoder(std::string_view name, const CatalogParams& params);
const std::vector<std::string>& lipschitz_catalog_names();

// ---------------------------------------------------------------------------
// Representation and operations

struct Representation {
    Vector r;
    std::size_t source_n = 0;
};

Vector encode(const EncoderSpec& enc, std::span<const double> x, double y);

/// Mean aggregation r_C = (1/n) sum h(x_i, y_i). Throws EmptyContextError for n = 0.
Representation aggregate(const EncoderSpec& enc, const ContextSet& ctx);

/// r_{C+} = r_C + (h_new - r_C) / (n + 1).
Representation augment_representation(const Representation& r, std::span<const double> h_new);

/// delta_r = r_{C+} - r_C = (h_new - r_C) / (n + 1).
Vector representation_shift(const Representation& r, std::span<const double> h_new);

GaussianPredictive predict(const DecoderSpec& dec, std::span<const double> x_target, const Representation& r);

/// Factorized joint prediction: one independent Gaussian per target.
std::vector<GaussianPredictive> joint_predict(const DecoderSpec& dec, const std::vector<Vector>& targets,
                                              const Representation& r);

double euclidean_norm(std::span<const double> v);

}  // namespace cnpgap
