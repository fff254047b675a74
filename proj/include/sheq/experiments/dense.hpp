#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "../core.hpp"
#include "../covariance.hpp"
#include "../evolution.hpp"
#include "../fem.hpp"
#include "../linear_mr.hpp"
#include "../noise_path.hpp"
#include "../time_grid.hpp"

namespace sheq::experiments {

// Companion solver for the tolerance-accumulation study: the same implicit
// step the adaptive solver certifies, taken to its tolerance-zero limit with
// a banded direct solve and quadrature-assembled composition load.  The
// fixed point of
//     (M + tau S) v = M v_prev + tau b,   b_i = (f(v + w), phi_i)
// is iterated to machine level; tau * Lip(f) < 1/2 makes it a contraction.
inline std::vector<double> dense_step(int n_dof, double tau, const std::vector<double>& v_prev,
                                      const std::vector<double>& w_nodal, const Nonlinearity& f,
                                      double tol = 1e-13, int max_it = 400) {
    if (v_prev.size() != std::size_t(n_dof) || w_nodal.size() != std::size_t(n_dof))
        throw AssumptionViolation("dense step: nodal vectors must match the mesh");
    Tridiag mass = fem::mass_matrix(n_dof);
    Tridiag step = fem::step_matrix(n_dof, tau);
    std::vector<double> mv(n_dof, 0.0);
    mass.multiply(v_prev, mv);

    std::vector<double> v = v_prev;
    for (int it = 0; it < max_it; ++it) {
        auto g = [&](double x) {
            return f.f(fem::nodal_interp(v, n_dof, x) + fem::nodal_interp(w_nodal, n_dof, x));
        };
        std::vector<double> rhs = fem::assemble_load(g, n_dof);
        for (int i = 0; i < n_dof; ++i) rhs[i] = mv[i] + tau * rhs[i];
        step.solve(rhs);
        double delta = 0.0;
        for (int i = 0; i < n_dof; ++i) delta += (rhs[i] - v[i]) * (rhs[i] - v[i]);
        v.swap(rhs);
        if (std::sqrt(delta) <= tol) return v;
    }
    throw NonconvergenceError("dense fixed-point iteration refused to settle", tol);
}

inline double mass_norm(const std::vector<double>& d, int n_dof) {
    Tridiag mass = fem::mass_matrix(n_dof);
    std::vector<double> md(n_dof, 0.0);
    mass.multiply(d, md);
    double s = 0.0;
    for (int i = 0; i < n_dof; ++i) s += d[i] * md[i];
    return std::sqrt(std::max(s, 0.0));
}

// sqrt(d' (M + tau S) d): the step-operator energy norm the per-step solver
// tolerance is certified in.
inline double energy_norm(const std::vector<double>& d, int n_dof, double tau) {
    Tridiag step = fem::step_matrix(n_dof, tau);
    std::vector<double> sd(n_dof, 0.0);
    step.multiply(d, sd);
    double s = 0.0;
    for (int i = 0; i < n_dof; ++i) s += d[i] * sd[i];
    return std::sqrt(std::max(s, 0.0));
}

struct DenseRun {
    std::vector<std::vector<double>> u;  // nodal u = v + w at nodes 0..N
    std::vector<std::vector<double>> v;  // nodal nonlinear part at nodes 0..N
};

// Reference trajectory on the same mesh, same splitting, same noise path as
// the adaptive run: only the per-step solver differs, so the gap between the
// two isolates exactly what the tolerance schedule is allowed to spend.
inline DenseRun dense_trajectory(int J, const CovarianceSpec& cov, const Nonlinearity& f,
                                 const SpectralField& u0, const NoisePath& path) {
    const TimeGrid& grid = path.grid;
    const double tau = grid.tau();
    if (tau * f.lip >= 0.5)
        throw AssumptionViolation("tau * Lipschitz must stay below 1/2 for the implicit step");
    ConvolutionScheme conv(J, cov, grid);
    const int n_dof = conv.dim();

    DenseRun out;
    out.v.push_back(fem::l2_project(u0.c, n_dof));
    std::vector<double> first(n_dof, 0.0);
    for (int i = 0; i < n_dof; ++i) first[i] = out.v[0][i];
    out.u.push_back(first);

    for (std::uint64_t n = 1; n <= grid.N; ++n) {
        conv.advance(path, n - 1);
        const std::vector<double>& w = conv.nodal();
        std::vector<double> v = dense_step(n_dof, tau, out.v.back(), w, f);
        std::vector<double> u(n_dof, 0.0);
        for (int i = 0; i < n_dof; ++i) u[i] = v[i] + w[i];
        out.v.push_back(std::move(v));
        out.u.push_back(std::move(u));
    }
    return out;
}

}  // namespace sheq::experiments
