#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "../core.hpp"
#include "../fem.hpp"
#include "../wavelet/transforms.hpp"

namespace sheq::adaptive {

// Midpoint upsampling of nodal values of a piecewise-linear function; exact
// because the fine nodes are interpolation points of the coarse interpolant.
inline std::vector<double> upsample_nodal(std::vector<double> v, int from_mesh, int to_mesh) {
    for (int m = from_mesh; m < to_mesh; ++m) {
        const int nf = (1 << (m + 1)) - 1;
        std::vector<double> f(nf, 0.0);
        const int nc = (1 << m) - 1;
        for (int i = 1; i <= nc; ++i) f[2 * i - 1] = v[i - 1];
        for (int i = 0; i < nf; i += 2) {
            const double l = i >= 1 ? f[i - 1] : 0.0;
            const double r = i + 1 < nf ? f[i + 1] : 0.0;
            f[i] = 0.5 * (l + r);
        }
        v = std::move(f);
    }
    return v;
}

// L2 distance between piecewise-linear functions given nodally on meshes m
// and m+1 (the coarse one is upsampled first).
inline double nodal_l2_gap(const std::vector<double>& coarse, const std::vector<double>& fine,
                           int fine_mesh) {
    std::vector<double> c = upsample_nodal(coarse, fine_mesh - 1, fine_mesh);
    const int n = (1 << fine_mesh) - 1;
    std::vector<double> d(n), md;
    for (int i = 0; i < n; ++i) d[i] = fine[i] - c[i];
    fem::mass_matrix(n).multiply(d, md);
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += d[i] * md[i];
    return std::sqrt(std::max(acc, 0.0));
}

// Wavelet expansion of x -> f(v(x) + w(x)) to tolerance tol in L2.
// Route: interpolate on a covering mesh, compare against the next-finer
// interpolant, accept once the two agree to 3 tol / 4 (errors quarter per
// level, so the kept finer interpolant then sits near tol/4), then keep the
// finer expansion coarsened by another tol/2. Refuses meshes beyond mesh_cap.
inline WaveletCoeffs eval_nonlinear(const WaveletCoeffs& v, const std::vector<double>& w_nodal,
                                    int w_mesh, const std::function<double(double)>& f, double tol,
                                    int mesh_cap, std::uint64_t* work = nullptr) {
    int L = std::max(std::max(v.empty() ? 2 : v.max_level() + 2, w_mesh), 4);
    if (L + 1 > mesh_cap) throw RefinementExhausted("nonlinear evaluation mesh cap");
    auto interpolant = [&](int mesh) {
        std::vector<double> u = ifwt(v, mesh);
        const std::vector<double> w = upsample_nodal(w_nodal, w_mesh, mesh);
        for (std::size_t i = 0; i < u.size(); ++i) u[i] = f(u[i] + w[i]);
        if (work) *work += u.size();
        return u;
    };
    std::vector<double> gc = interpolant(L);
    while (true) {
        std::vector<double> gf = interpolant(L + 1);
        if (nodal_l2_gap(gc, gf, L + 1) <= 0.75 * tol) {
            return coarsen(fwt(std::move(gf), L + 1), 0.5 * tol, false);
        }
        if (L + 2 > mesh_cap) throw RefinementExhausted("nonlinear evaluation mesh cap");
        gc = std::move(gf);
        ++L;
    }
}

} // namespace sheq::adaptive
