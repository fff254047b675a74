#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "core.hpp"

namespace sheq {

inline constexpr double PI = 3.14159265358979323846;

// Laplacian eigenvalue on (0,1) with Dirichlet conditions.
inline double eigenvalue(std::uint64_t k) { return double(k) * PI * double(k) * PI; }

// Diagonal covariance q_k = k^{-rho} on the Laplacian eigenbasis.
struct CovarianceSpec {
    double rho = 2.0;
    std::uint64_t K = 256;
    double beta_target = 1.0;

    CovarianceSpec() = default;
    CovarianceSpec(double rho_, std::uint64_t K_, double beta_)
        : rho(rho_), K(K_), beta_target(beta_) {
        if (rho < 0.0) throw AssumptionViolation("covariance decay rho must be >= 0");
        if (K == 0) throw AssumptionViolation("mode truncation K must be >= 1");
        if (!(rho > 2.0 * beta_target - 1.0))
            throw AssumptionViolation("regularity assumption violated: need rho > 2*beta - 1 (rho=" +
                                      std::to_string(rho) + ", beta=" + std::to_string(beta_target) + ")");
    }

    double q(std::uint64_t k) const { return std::pow(double(k), -rho); }
};

struct WeightedNorm {
    double value;       // (head sum)^{1/2}
    double tail_bound;  // integral-test bound on the omitted tail of the squared sum
};

// Truncated Hilbert-Schmidt-type norm (sum_{k<=K} lambda_k^{beta-1} q_k)^{1/2}
// with an integral-test tail bound. Errors if the requested beta is outside the
// convergent range or the tail bound exceeds 1% of the head.
inline WeightedNorm hs_weighted_norm(const CovarianceSpec& spec, double beta) {
    const double p = spec.rho + 2.0 - 2.0 * beta;  // head terms decay like k^{-p}
    if (!(p > 1.0))
        throw AssumptionViolation("weighted covariance sum diverges: need rho > 2*beta - 1");
    double head = 0.0;
    for (std::uint64_t k = 1; k <= spec.K; ++k)
        head += std::pow(eigenvalue(k), beta - 1.0) * spec.q(k);
    // integral over [K, inf) of (pi x)^{2(beta-1)} x^{-rho} dx
    const double tail = std::pow(PI, 2.0 * (beta - 1.0)) *
                        std::pow(double(spec.K), 1.0 - p) / (p - 1.0);
    if (tail > 0.01 * head)
        throw AssumptionViolation("weighted-norm truncation too short: tail bound above 1% of head");
    return {std::sqrt(head), tail};
}

} // namespace sheq
