#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "core.hpp"
#include "covariance.hpp"

namespace sheq {

// Truncated sine-series representation: field(x) = sum_k c_k sqrt(2) sin(k pi x).
// The basis is orthonormal in L2(0,1), so the L2 norm is the Euclidean norm of c.
struct SpectralField {
    std::vector<double> c;  // index 0 <-> mode k=1

    SpectralField() = default;
    explicit SpectralField(std::size_t K) : c(K, 0.0) {}

    std::size_t modes() const { return c.size(); }

    double l2_norm() const {
        double s = 0.0;
        for (double v : c) s += v * v;
        return std::sqrt(s);
    }

    double evaluate(double x) const {
        double s = 0.0;
        for (std::size_t k = 1; k <= c.size(); ++k)
            s += c[k - 1] * std::sqrt(2.0) * std::sin(double(k) * PI * x);
        return s;
    }
};

// Normalized Dirichlet eigenfunction e_k(x) = sqrt(2) sin(k pi x) on [0,1].
inline double eval_eigenfunction(std::size_t k, double x) {
    if (k == 0) throw AssumptionViolation("eigenfunction index starts at 1");
    if (x < 0.0 || x > 1.0) throw AssumptionViolation("eigenfunction argument outside [0,1]");
    return std::sqrt(2.0) * std::sin(double(k) * PI * x);
}

// Heat semigroup e^{-tA} acting mode-wise.
inline void semigroup_apply(SpectralField& f, double t) {
    for (std::size_t k = 1; k <= f.modes(); ++k) f.c[k - 1] *= std::exp(-eigenvalue(k) * t);
}

// Fractional power A^s acting mode-wise (s may be negative).
inline void fractional_apply(SpectralField& f, double s) {
    for (std::size_t k = 1; k <= f.modes(); ++k) f.c[k - 1] *= std::pow(eigenvalue(k), s);
}

// Sobolev-scale norm |A^{s/2} f|_{L2} = (sum lambda_k^s c_k^2)^{1/2}.
inline double hdot_norm(const SpectralField& f, double s) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= f.modes(); ++k)
        acc += std::pow(eigenvalue(k), s) * f.c[k - 1] * f.c[k - 1];
    return std::sqrt(acc);
}

// Backward Euler rational factor r(s) = 1/(1+s).
inline double euler_factor(double tau, double lambda) { return 1.0 / (1.0 + tau * lambda); }

// Partial sum tau * sum_{n=1}^{terms} (1+tau*lambda)^{-2n}.
inline double euler_damping_partial_sum(double tau, double lambda, std::uint64_t terms) {
    const double r2 = euler_factor(tau, lambda) * euler_factor(tau, lambda);
    double sum = 0.0, p = 1.0;
    for (std::uint64_t n = 0; n < terms; ++n) {
        p *= r2;
        sum += p;
    }
    return tau * sum;
}

// Closed form of the full series: tau * r^2/(1-r^2) = 1/(lambda(2+tau*lambda)).
inline double euler_damping_closed_form(double tau, double lambda) {
    return 1.0 / (lambda * (2.0 + tau * lambda));
}

// n-fold resolvent power r(tau A)^n applied mode-wise.
inline void euler_rational_apply(SpectralField& f, double tau, std::uint64_t n) {
    for (std::size_t k = 1; k <= f.modes(); ++k)
        f.c[k - 1] *= std::pow(euler_factor(tau, eigenvalue(k)), double(n));
}

// One exact Ornstein-Uhlenbeck transition for a single mode of the stochastic
// convolution, conditioned on the Brownian increment that the discrete schemes
// consume. With unit-variance-rate noise (per-mode variance q per unit time),
//   w(t+tau) = e^{-lambda tau} w(t) + q^{1/2} I,
//   I | dB ~ N(cov/tau * dB, var1 - cov^2/tau),
// where dB is the increment with Var dB = tau, var1 = (1-e^{-2 lambda tau})/(2 lambda),
// cov = (1-e^{-lambda tau})/lambda. The conditional variance cancels
// catastrophically for small a = lambda*tau, so a series branch takes over:
//   sigma^2 = tau * (a^2/12 - a^3/12 + 17 a^4/360 + O(a^5)).
struct ExactModeStep {
    double decay;       // e^{-lambda tau}
    double cond_gain;   // cov/tau, multiplies the increment
    double cond_std;    // sqrt(var1 - cov^2/tau)

    ExactModeStep(double tau, double lambda) {
        const double a = lambda * tau;
        decay = std::exp(-a);
        const double cov = -std::expm1(-a) / lambda;  // (1-e^{-a})/lambda
        cond_gain = cov / tau;
        double s2;
        if (a < 1e-2) {
            s2 = tau * (a * a / 12.0 - a * a * a / 12.0 + 17.0 * a * a * a * a / 360.0);
        } else {
            const double var1 = -std::expm1(-2.0 * a) / (2.0 * lambda);
            s2 = var1 - cov * cov / tau;
            if (s2 < 0.0) {
                if (s2 < -1e-12 * tau) throw AssumptionViolation("conditional variance lost positivity");
                s2 = 0.0;
            }
        }
        cond_std = std::sqrt(s2);
    }

    // w_next given w, the Brownian increment dB (Var = tau), an independent
    // standard normal zeta, and the mode's covariance weight q.
    double advance(double w, double dB, double zeta, double q) const {
        const double sqrt_q = std::sqrt(q);
        return decay * w + sqrt_q * (cond_gain * dB + cond_std * zeta);
    }
};

// Unconditional exact transition (no Brownian coupling): stationary-bound
// variance formulation used by the path-regularity study.
struct ExactModeMarginal {
    double decay;  // e^{-lambda tau}
    double std1;   // sqrt((1-e^{-2 lambda tau})/(2 lambda)), unit q

    ExactModeMarginal(double tau, double lambda) {
        decay = std::exp(-lambda * tau);
        std1 = std::sqrt(-std::expm1(-2.0 * lambda * tau) / (2.0 * lambda));
    }

    double advance(double w, double zeta, double q) const {
        return decay * w + std::sqrt(q) * std1 * zeta;
    }
};

} // namespace sheq
