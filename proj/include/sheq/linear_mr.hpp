#pragma once

#include <cmath>
#include <vector>

#include "covariance.hpp"
#include "fem.hpp"
#include "noise_path.hpp"
#include "spectral.hpp"
#include "time_grid.hpp"
#include "wavelet/transforms.hpp"

namespace sheq {

// Implicit-Euler Galerkin scheme for the stochastic convolution on the nested
// mesh of wavelet depth J (mesh level J+2), advanced in lockstep with the
// mode-wise time-discrete solution it is measured against. Per step: one
// weight fold + DST for the noise load, one tridiagonal solve, and the exact
// quadratic form for the spatial error |w_h - w~|_{L2}.
class ConvolutionScheme {
public:
    ConvolutionScheme(int J, const CovarianceSpec& cov, const TimeGrid& grid)
        : mesh_(J + 2),
          n_((1 << (J + 2)) - 1),
          cov_(cov),
          grid_(grid),
          mass_(fem::mass_matrix(n_)),
          step_(fem::step_matrix(n_, grid.tau())),
          form_(n_),
          w_(n_, 0.0),
          wt_(cov.K, 0.0) {}

    // Advance both solutions through 0-based step n; returns the squared
    // spatial error after the step.
    double advance(const NoisePath& path, std::uint64_t nstep) {
        const double tau = grid_.tau();
        for (int k = 1; k <= int(cov_.K); ++k) {
            const double inc = path.increment(cov_, k, nstep);
            wt_[k - 1] = euler_factor(tau, eigenvalue(k)) * (wt_[k - 1] + inc);
        }
        std::vector<double> rhs;
        mass_.multiply(w_, rhs);
        const std::vector<double> load = increment_load(path, cov_, nstep, n_);
        for (int i = 0; i < n_; ++i) rhs[i] += load[i];
        step_.solve(rhs);
        w_ = std::move(rhs);
        return form_.squared(w_, wt_);
    }

    // Noise increment tested against the nodal hat basis: component j equals
    // (dW^n, phi_j) summed over the truncated expansion. One DST after folding
    // the modes into their aliased bins.
    static std::vector<double> increment_load(const NoisePath& path, const CovarianceSpec& cov,
                                              std::uint64_t nstep, int n) {
        std::vector<double> g(cov.K);
        for (int k = 1; k <= int(cov.K); ++k)
            g[k - 1] = path.increment(cov, k, nstep) * fem::mode_load_factor(k, n);
        return fem::sine_combination_nodal(g, n);
    }

    const std::vector<double>& nodal() const { return w_; }
    const std::vector<double>& reference_modes() const { return wt_; }
    int mesh() const { return mesh_; }
    int dim() const { return n_; }
    WaveletCoeffs coeffs() const { return fwt(w_, mesh_); }

private:
    int mesh_, n_;
    CovarianceSpec cov_;
    TimeGrid grid_;
    Tridiag mass_, step_;
    fem::SpectralErrorForm form_;
    std::vector<double> w_;   // Galerkin solution, nodal
    std::vector<double> wt_;  // time-discrete mode coefficients
};

struct ConvolutionPathResult {
    std::vector<double> err_sq;  // per step, n = 1..N
    double max_err_sq = 0.0;
};

inline ConvolutionPathResult run_convolution_path(int J, const CovarianceSpec& cov,
                                                  const TimeGrid& grid, const NoisePath& path) {
    ConvolutionScheme s(J, cov, grid);
    ConvolutionPathResult r;
    r.err_sq.reserve(grid.N);
    for (std::uint64_t n = 0; n < grid.N; ++n) {
        const double e2 = s.advance(path, n);
        r.err_sq.push_back(e2);
        if (e2 > r.max_err_sq) r.max_err_sq = e2;
    }
    return r;
}

// Closed form for E|w_h^N - w~^N|_{L2}^2, usable because everything is
// explicit on a uniform mesh: the element eigenpairs are
//   mu_i = (6/h^2)(1-cos(i pi h))/(2+cos(i pi h)),
// the mass-orthonormal eigenvectors have components gamma_i sin(i j pi h),
// and a sine mode k is M-orthogonal to all eigenvectors except the single
// aliased index i(k). Geometric sums over the steps then collapse each
// (mode, step) double sum to G(x) = x(1-x^N)/(1-x).
inline double exact_convolution_error(int J, const CovarianceSpec& cov, const TimeGrid& grid) {
    const int n = (1 << (J + 2)) - 1;
    const double h = fem::mesh_width(n);
    const double tau = grid.tau();
    const auto G = [&](double x) {
        return x * (1.0 - std::pow(x, double(grid.N))) / (1.0 - x);
    };
    const int period = 2 * (n + 1);
    double acc = 0.0;
    for (int k = 1; k <= int(cov.K); ++k) {
        const double rk = euler_factor(tau, eigenvalue(k));
        double term = G(rk * rk);
        const int r = k % period;
        if (r != 0 && r != n + 1) {
            const int i = r <= n ? r : period - r;
            const double ci = std::cos(i * PI * h);
            const double mu = 6.0 / (h * h) * (1.0 - ci) / (2.0 + ci);
            const double rho = 1.0 / (1.0 + tau * mu);
            const double gamma2 = 6.0 / (2.0 + ci);
            const double lk = fem::mode_load_factor(k, n);
            const double beta2 = gamma2 * lk * lk * (n + 1) * (n + 1) / 4.0;
            term += beta2 * (G(rho * rho) - 2.0 * G(rk * rho));
        }
        acc += cov.q(k) * tau * term;
    }
    return std::sqrt(acc);
}

// Exact root-mean-square distance, at the coarse nodes, between the implicit
// Euler chain with step T/N and the same chain run `refine` times finer on a
// common Brownian path (both spectrally exact in space). Per mode, the three
// second moments a = E x^2, b = E y^2, c = E xy close under one coarse step:
//   x <- rc (x + dB),   y <- rf^R y + sum_i rf^{R-i+1} dB_i,
// so geometric sums give the fine-chain injections g1, g2 below. Returns the
// worst value over the coarse nodes.
inline double exact_temporal_error(const CovarianceSpec& cov, double T, std::uint64_t N,
                                   std::uint64_t refine) {
    const double tau_c = T / double(N);
    const double tau_f = tau_c / double(refine);
    std::vector<double> a(cov.K, 0.0), b(cov.K, 0.0), c(cov.K, 0.0);
    std::vector<double> rc(cov.K), rfR(cov.K), g1(cov.K), g2(cov.K), tf_g2(cov.K);
    for (int k = 1; k <= int(cov.K); ++k) {
        const double lam = eigenvalue(k);
        const double rf = euler_factor(tau_f, lam);
        rc[k - 1] = euler_factor(tau_c, lam);
        rfR[k - 1] = std::pow(rf, double(refine));
        g1[k - 1] = rf * (1.0 - rfR[k - 1]) / (1.0 - rf);
        g2[k - 1] = rf * rf * (1.0 - rfR[k - 1] * rfR[k - 1]) / (1.0 - rf * rf);
        tf_g2[k - 1] = tau_f * g2[k - 1];
    }
    double worst = 0.0;
    for (std::uint64_t n = 0; n < N; ++n) {
        double err2 = 0.0;
        for (int k = 0; k < int(cov.K); ++k) {
            a[k] = rc[k] * rc[k] * (a[k] + tau_c);
            b[k] = rfR[k] * rfR[k] * b[k] + tf_g2[k];
            c[k] = rc[k] * rfR[k] * c[k] + rc[k] * tau_f * g1[k];
            err2 += cov.q(k + 1) * (a[k] + b[k] - 2.0 * c[k]);
        }
        worst = std::max(worst, err2);
    }
    return std::sqrt(worst);
}

} // namespace sheq
