#include "cnpgap/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "cnpgap/errors.hpp"

namespace cnpgap {

namespace {

void require_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << name << " must be finite (got " << v << ")";
        throw DomainError(os.str());
    }
}

void require_expansion_domain(double eps_sigma, double sigma0) {
    if (!(std::abs(eps_sigma) < 0.5 * sigma0)) {
        std::ostringstream os;
        os << "quadratic KL expansion requires |eps_sigma| < sigma0/2 (got eps_sigma=" << eps_sigma
           << ", sigma0=" << sigma0 << ")";
        throw DomainError(os.str());
    }
}

// KL in terms of z = dmu / sigma0 and u = sigma1 / sigma0 - 1. The closed form
//   log(sigma0/sigma1) + (sigma1^2 + dmu^2)/(2 sigma0^2) - 1/2
// becomes (u + u^2/2 - log1p(u)) + z^2/2, which stays accurate when the two
// stds are close.
double variance_term(double u) { return u + 0.5 * u * u - std::log1p(u); }

double kl_relative(double z, double u) { return std::max(variance_term(u) + 0.5 * z * z, 0.0); }

}  // namespace

GaussianPredictive::GaussianPredictive(double mean, double std) : mean_(mean), std_(std) {
    require_finite(mean, "mean");
    require_finite(std, "std");
    if (!(std > 0.0)) {
        std::ostringstream os;
        os << "std must be strictly positive (got " << std << ")";
        throw DomainError(os.str());
    }
}

double GaussianPredictive::log_pdf(double y) const noexcept {
    const double z = (y - mean_) / std_;
    return -0.5 * z * z - std::log(std_) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double GaussianPredictive::pdf(double y) const noexcept { return std::exp(log_pdf(y)); }

double kl_gaussian(const GaussianPredictive& p1, const GaussianPredictive& p0) {
    const double u = (p1.std() - p0.std()) / p0.std();
    const double z = (p1.mean() - p0.mean()) / p0.std();
    return kl_relative(z, u);
}

double kl_quadratic_approx(double eps_mu, double eps_sigma, double sigma0) {
    require_finite(eps_mu, "eps_mu");
    require_finite(eps_sigma, "eps_sigma");
    require_finite(sigma0, "sigma0");
    if (!(sigma0 > 0.0)) throw DomainError("sigma0 must be strictly positive");
    require_expansion_domain(eps_sigma, sigma0);
    const double z = eps_mu / sigma0;
    const double u = eps_sigma / sigma0;
    return 0.5 * z * z + u * u;
}

KlExpansion kl_expansion_audit(const GaussianPredictive& base, double eps_mu, double eps_sigma) {
    const double quadratic = kl_quadratic_approx(eps_mu, eps_sigma, base.std());
    // Work in the perturbations directly rather than re-subtracting the
    // perturbed parameters; the mean shift then cancels exactly in the remainder.
    const double z = eps_mu / base.std();
    const double u = eps_sigma / base.std();
    const double exact = kl_relative(z, u);
    const double remainder = variance_term(u) - u * u;
    return KlExpansion{quadratic, exact, remainder, eps_mu, eps_sigma};
}

}  // namespace cnpgap
