#pragma once

#include <cstddef>

#include "cnpgap/model.hpp"

namespace cnpgap {

/// Conditioning consistency gap at one (context, new point, target) triple,
/// together with every intermediate needed to audit it.
struct GapResult {
    double delta = 0.0;  // KL(p(.|C+) || p(.|C)), nats
    double mu_c = 0.0;
    double mu_cplus = 0.0;
    double sigma_c = 0.0;
    double sigma_cplus = 0.0;
    Vector delta_r;
    std::size_t n = 0;
};

GapResult consistency_gap(const EncoderSpec& enc, const DecoderSpec& dec, const ContextSet& ctx,
                          const ContextPoint& new_point, std::span<const double> x_target);

/// Same quantity starting from an already aggregated representation and the
/// encoding of the new point.
GapResult gap_from_representation(const DecoderSpec& dec, const Representation& r, std::span<const double> h_new,
                                  std::span<const double> x_target);

/// Closed form ||w^T (h_new - r_C)||^2 / (2 sigma^2 (n+1)^2) for a
/// constant-variance linear decoder evaluated with weight `w_at_target`.
double gap_linear_exact(const DecoderSpec& dec, std::span<const double> w_at_target, std::span<const double> h_new,
                        const Representation& r);

enum class BoundKind { Linear, Lipschitz };

struct BoundConstants {
    BoundKind kind = BoundKind::Linear;
    double lipschitz_mean = 0.0;  // B_W for the linear bound
    double lipschitz_std = 0.0;
    double encoder_bound = 0.0;
    double sigma = 0.0;  // sigma (linear) or sigma_min (Lipschitz)
    std::size_t n = 0;
};

struct BoundEvaluation {
    double bound = 0.0;
    /// n > 4 L_sigma B_h / sigma_min for the Lipschitz bound; always true for linear.
    bool regime_valid = true;
    BoundConstants constants;
};

/// 2 B_W^2 B_h^2 / (sigma^2 (n+1)^2).
BoundEvaluation bound_linear(double b_w, double b_h, double sigma, std::size_t n);

/// Leading term 2 (L_mu^2 + 2 L_sigma^2) B_h^2 / (sigma_min^2 (n+1)^2). The
/// O(1/n^3) remainder is not included; compare measured gaps against
/// `bound * lipschitz_slack(n)`.
BoundEvaluation bound_lipschitz(double l_mu, double l_sigma, double b_h, double sigma_min, std::size_t n);

/// Multiplicative allowance 1 + 10/n for the un-added remainder of the Lipschitz bound.
double lipschitz_slack(std::size_t n);

/// Smallest n >= 1 with bound_linear(b_w, b_h, sigma, n) < eps.
std::size_t min_context_for_eps(double b_w, double b_h, double sigma, double eps);

/// Bound appropriate to a decoder: linear bound for LinearDecoder, Lipschitz
/// bound from declared constants otherwise (+inf when L_mu is infinite).
BoundEvaluation bound_for(const EncoderSpec& enc, const DecoderSpec& dec, std::size_t n);

struct WorstCaseInstance {
    EncoderSpec encoder;
    DecoderSpec decoder;
    ContextSet context;
    ContextPoint new_point;
    Vector target;
    double predicted_gap = 0.0;

    GapResult evaluate() const;
};

/// Sign encoder, mu = B_W r, constant sigma, all-negative context of size n and
/// a positive new point. The gap equals bound_linear exactly.
WorstCaseInstance construct_worstcase_linear(double b_w, double b_h, double sigma, std::size_t n,
                                             double target = 0.0);

/// Sign encoder, mu = L_mu r, std = sigma_min + L_sigma |r + B_h|, all-negative
/// context. predicted_gap is the leading term; the measured gap differs by O(1/n^3).
WorstCaseInstance construct_worstcase_lipschitz(double l_mu, double l_sigma, double b_h, double sigma_min,
                                                std::size_t n, double target = 0.0);

/// n points with y = -1 at x_i = i/n.
ContextSet negative_context(std::size_t n);

}  // namespace cnpgap
