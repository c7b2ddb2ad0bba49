#pragma once

namespace cnpgap {

/// Univariate Gaussian predictive distribution N(mean, std^2).
///
/// Construction validates that both fields are finite and that std > 0,
/// throwing DomainError otherwise, so every live instance is a valid density.
class GaussianPredictive {
public:
    GaussianPredictive(double mean, double std);

    double mean() const noexcept { return mean_; }
    double std() const noexcept { return std_; }
    double variance() const noexcept { return std_ * std_; }

    double log_pdf(double y) const noexcept;
    double pdf(double y) const noexcept;

    friend bool operator==(const GaussianPredictive&, const GaussianPredictive&) = default;

private:
    double mean_;
    double std_;
};

/// KL(p1 || p0) in nats.
///
/// The argument order is the one used by the consistency gap: the first slot
/// holds the predictive under the augmented context, the second the predictive
/// under the original context. The divergence is asymmetric; swapping the
/// arguments gives a different number.
double kl_gaussian(const GaussianPredictive& p1, const GaussianPredictive& p0);

/// Second-order term eps_mu^2 / (2 sigma0^2) + eps_sigma^2 / sigma0^2.
/// Requires sigma0 > 0 and |eps_sigma| < sigma0 / 2.
double kl_quadratic_approx(double eps_mu, double eps_sigma, double sigma0);

struct KlExpansion {
    double quadratic_term;
    double exact_kl;
    double remainder;  // exact_kl - quadratic_term
    double eps_mu;
    double eps_sigma;
};

/// Compares the exact KL of N(mu + eps_mu, (sigma + eps_sigma)^2) against `base`
/// with its quadratic approximation.
KlExpansion kl_expansion_audit(const GaussianPredictive& base, double eps_mu, double eps_sigma);

}  // namespace cnpgap
