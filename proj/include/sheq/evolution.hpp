#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "adaptive/solve.hpp"
#include "core.hpp"
#include "covariance.hpp"
#include "fem.hpp"
#include "fft.hpp"
#include "linear_mr.hpp"
#include "noise_path.hpp"
#include "spectral.hpp"
#include "time_grid.hpp"
#include "wavelet/transforms.hpp"

namespace sheq {

// Reaction term together with its (global) Lipschitz constant; the implicit
// step is contractive only while tau * lip < 1/2, which every consumer checks.
struct Nonlinearity {
    std::string name;
    std::function<double(double)> f;
    double lip = 0.0;
};

inline Nonlinearity make_nonlinearity(const std::string& name, double scale = 1.0) {
    if (name == "zero") return {name, [](double) { return 0.0; }, 0.0};
    if (name == "sine")
        return {name, [scale](double u) { return scale * std::sin(u); }, std::abs(scale)};
    if (name == "bounded")
        return {name, [scale](double u) { return scale * u / (1.0 + u * u); }, std::abs(scale)};
    throw AssumptionViolation("unknown nonlinearity: " + name);
}

// Initial data in sine coordinates.
inline SpectralField initial_field(const std::string& name, std::size_t K) {
    SpectralField u0(K);
    if (name == "zero") return u0;
    if (name == "mode1") {
        u0.c[0] = 1.0;
        return u0;
    }
    if (name == "bump") {  // x(1-x), coefficients 4 sqrt(2)/(k pi)^3 for odd k
        for (std::size_t k = 1; k <= K; k += 2)
            u0.c[k - 1] = 4.0 * std::sqrt(2.0) / std::pow(double(k) * PI, 3);
        return u0;
    }
    throw AssumptionViolation("unknown initial field: " + name);
}

// Solve c + tau A c = rhs + tau F(c + w) in sine coordinates by fixed-point
// iteration to absolute l2 increment 1e-12. The composition F is computed by
// nq-point sine quadrature (transform to nodal values, apply f, transform
// back). w, if present, holds nodal values on the same quadrature mesh.
// c enters as the initial guess and leaves as the solution; returns the
// number of iterations taken.
inline int implicit_spectral_step(std::vector<double>& c, const std::vector<double>& rhs,
                                  double tau, const Nonlinearity& f, int nq,
                                  const std::vector<double>* w_quad = nullptr) {
    const int K = int(rhs.size());
    std::vector<double> nodal, fc, next(K);
    for (int it = 1;; ++it) {
        if (it > 300) throw AssumptionViolation("fixed-point iteration refused to settle");
        spectral_to_nodal(c, nodal, nq);
        if (w_quad)
            for (int i = 0; i < nq; ++i) nodal[i] += (*w_quad)[i];
        for (double& v : nodal) v = f.f(v);
        nodal_to_spectral(nodal, fc, K);
        double delta = 0.0;
        for (int k = 0; k < K; ++k) {
            const double nv = euler_factor(tau, eigenvalue(std::size_t(k) + 1)) *
                              (rhs[k] + tau * fc[k]);
            delta += (nv - c[k]) * (nv - c[k]);
            next[k] = nv;
        }
        c.assign(next.begin(), next.end());
        if (std::sqrt(delta) <= 1e-12) return it;
    }
}

struct SpectralTrajectory {
    std::vector<SpectralField> at;  // index i -> time node i * stride
    std::uint64_t stride = 1;
    std::uint64_t picard_total = 0;
};

// Fully implicit spectral scheme for the complete equation,
//   u^n + tau A u^n = u^{n-1} + tau f(u^n) + dW^n,
// storing the state at every stride-th node. Spatially exact on the first K
// modes; the Nemytskii composition uses quad_factor*K sine-quadrature points.
inline SpectralTrajectory spectral_backward_euler(const CovarianceSpec& cov, const Nonlinearity& f,
                                                  const SpectralField& u0, const NoisePath& path,
                                                  int quad_factor = 2, std::uint64_t stride = 1) {
    const TimeGrid& grid = path.grid;
    const double tau = grid.tau();
    if (tau * f.lip >= 0.5)
        throw AssumptionViolation("tau * Lipschitz must stay below 1/2 for the implicit step");
    const int K = int(cov.K);
    const int nq = quad_factor * K;
    std::vector<double> c(u0.c);
    c.resize(std::size_t(K), 0.0);
    SpectralTrajectory out;
    out.stride = stride;
    SpectralField snap{std::size_t(K)};
    snap.c = c;
    out.at.push_back(snap);
    std::vector<double> rhs(std::size_t(K), 0.0);
    for (std::uint64_t n = 0; n < grid.N; ++n) {
        for (int k = 1; k <= K; ++k)
            rhs[std::size_t(k - 1)] = c[std::size_t(k - 1)] + path.increment(cov, std::uint64_t(k), n);
        out.picard_total += std::uint64_t(implicit_spectral_step(c, rhs, tau, f, nq));
        if ((n + 1) % stride == 0) {
            snap.c = c;
            out.at.push_back(snap);
        }
    }
    return out;
}

// Reference solution for temporal-rate measurements: the same scheme driven by
// the consistently refined Brownian path on a refine-times finer grid,
// reported at the original nodes.
inline SpectralTrajectory mild_reference(const CovarianceSpec& cov, const Nonlinearity& f,
                                         const SpectralField& u0, const NoisePath& path,
                                         std::uint64_t refine = 16, int quad_factor = 2) {
    if (refine < 16) throw AssumptionViolation("reference grid must be at least 16x finer");
    NoisePath fine = refine_path(path, refine);
    return spectral_backward_euler(cov, f, u0, fine, quad_factor, refine);
}

// -------------------------------------------------------------------------
// Adaptive split pipeline: linear substep on the fixed multiresolution space,
// nonlinear substep by the certified adaptive solver.

struct StepStats {
    std::uint64_t path_id = 0;
    std::uint64_t n = 0;  // 1-based time step
    double eps_n = 0.0;
    std::size_t support = 0;
    int iterations = 0;
    std::uint64_t op_count = 0;
    double residual = 0.0;
};

struct NonlinearRun {
    std::vector<WaveletCoeffs> v;        // nonlinear part at nodes 0..N
    std::vector<std::vector<double>> u;  // nodal u = v + w on mesh J+2 at nodes 0..N
    std::vector<StepStats> stats;        // one record per time step
    std::vector<double> conv_err_sq;     // linear substep vs spectral reference, per step
};

inline NonlinearRun run_nonlinear(int J, const CovarianceSpec& cov, const Nonlinearity& f,
                                  const SpectralField& u0, const NoisePath& path,
                                  const adaptive::ToleranceSchedule& sched,
                                  std::uint64_t path_id = 0) {
    sched.validate();
    const TimeGrid& grid = path.grid;
    if (sched.eps.size() != grid.N)
        throw AssumptionViolation("tolerance schedule length must match the time grid");
    const double tau = grid.tau();
    if (tau * f.lip >= 0.5)
        throw AssumptionViolation("tau * Lipschitz must stay below 1/2 for the implicit step");
    const int mesh = J + 2, n_dof = (1 << (J + 2)) - 1;

    ConvolutionScheme conv(J, cov, grid);
    adaptive::ImplicitOperator op{tau, 1.0};

    NonlinearRun out;
    std::vector<double> v0 = fem::l2_project(u0.c, n_dof);
    WaveletCoeffs v = coarsen(fwt(v0, mesh), 0.0, true);
    out.v.push_back(v);
    out.u.push_back(v0);  // w vanishes at t = 0

    for (std::uint64_t n = 0; n < grid.N; ++n) {
        out.conv_err_sq.push_back(conv.advance(path, n));
        const std::vector<double>& w_nodal = conv.nodal();
        adaptive::SolveReport rep;
        v = adaptive::solve_step(op, J, v, w_nodal, mesh, f.f, f.lip, sched.eps[n], rep,
                                 sched.eta_rule);
        out.stats.push_back({path_id, n + 1, sched.eps[n], rep.support, rep.iterations, rep.work,
                             rep.residual_norm});
        std::vector<double> u_nodal = ifwt(v, mesh);
        for (int i = 0; i < n_dof; ++i) u_nodal[std::size_t(i)] += w_nodal[std::size_t(i)];
        out.v.push_back(v);
        out.u.push_back(std::move(u_nodal));
    }
    return out;
}

}  // namespace sheq
