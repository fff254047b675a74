#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "banded.hpp"
#include "basis.hpp"
#include "coeffs.hpp"

namespace sheq {

// Fast wavelet transforms between fine-mesh nodal values (hat coefficients)
// and the hierarchical wavelet coefficients. Synthesis is sparse mat-vec;
// analysis solves one banded system per level. The per-level system is
// factored in column-balanced form ([P/sqrt(2) | raw masks], interleaved so
// kl = ku = 2) whose condition number is uniformly small, then the solution is
// rescaled to the convention scales.
namespace detail {

struct LevelSystem {
    BandedLU lu;
    int fine_mesh;
    explicit LevelSystem(int m) : lu((1 << m) - 1, 2, 2), fine_mesh(m) {
        const int nf = (1 << m) - 1;
        const int nc = (1 << (m - 1)) - 1;
        const int nw = 1 << (m - 1);
        const double is2 = 1.0 / std::sqrt(2.0);
        // coarse hat columns at interleaved position 2i-1 (1-based i)
        for (int i = 1; i <= nc; ++i) {
            const int col = 2 * i - 1;
            lu.at(2 * i - 1 - 1, col) += 0.5 * is2;  // node 2i-1
            lu.at(2 * i - 1, col) += 1.0 * is2;      // node 2i
            if (2 * i + 1 <= nf) lu.at(2 * i + 1 - 1, col) += 0.5 * is2;
        }
        // wavelet columns (raw masks) at interleaved position 2k
        for (int k = 0; k < nw; ++k) {
            const int col = 2 * k;
            if (k == 0) {
                for (int t = 0; t < 3; ++t) lu.at(t, col) += WAVELET_BOUNDARY_MASK[t];
            } else if (k == nw - 1) {
                for (int t = 0; t < 3; ++t) lu.at(nf - 3 + t, col) += WAVELET_BOUNDARY_MASK[2 - t];
            } else {
                for (int t = 0; t < 5; ++t) lu.at(2 * k - 2 + t, col) += WAVELET_INTERIOR_MASK[t];
            }
        }
        lu.factor();
    }
};

inline const LevelSystem& level_system(int m) {
    static std::vector<std::unique_ptr<LevelSystem>> cache;
    if (m >= int(cache.size())) cache.resize(m + 1);
    if (!cache[m]) cache[m] = std::make_unique<LevelSystem>(m);
    return *cache[m];
}

} // namespace detail

// One synthesis level: fine = P*coarse + Q*band, with band = wavelet level m-2.
inline void synthesize_level(const std::vector<double>& coarse, const WaveletCoeffs& coeffs,
                             int fine_mesh, std::vector<double>& fine) {
    const int m = fine_mesh;
    const int nf = (1 << m) - 1;
    const int nc = (1 << (m - 1)) - 1;
    fine.assign(nf, 0.0);
    for (int i = 1; i <= nc; ++i) {
        const double c = coarse[i - 1];
        fine[2 * i - 1] += c;
        fine[2 * i - 2] += 0.5 * c;
        if (2 * i < nf) fine[2 * i] += 0.5 * c;
    }
    const int j = m - 2;
    for (const auto& [k, d] : coeffs.level(j)) {
        const Footprint f = footprint(WIndex{j, k});
        for (int t = 0; t < f.count; ++t) fine[f.first_node - 1 + t] += d * f.vals[t];
    }
    return;
}

// Full synthesis to nodal values on target_mesh (>= max stored level + 2).
inline std::vector<double> ifwt(const WaveletCoeffs& coeffs, int target_mesh) {
    if (coeffs.max_level() > target_mesh - 2)
        throw AssumptionViolation("reconstruction mesh too coarse for stored levels");
    std::vector<double> cur(3, 0.0);
    for (const auto& [k, v] : coeffs.level(0)) cur[k] = ROOT_SCALE * v;
    for (int m = 3; m <= target_mesh; ++m) {
        std::vector<double> fine;
        synthesize_level(cur, coeffs, m, fine);
        cur = std::move(fine);
    }
    return cur;
}

// Full analysis of nodal values on a mesh into wavelet coefficients.
inline WaveletCoeffs fwt(std::vector<double> nodal, int mesh) {
    if (int(nodal.size()) != (1 << mesh) - 1)
        throw AssumptionViolation("nodal size does not match mesh");
    WaveletCoeffs out;
    const double s2 = std::sqrt(2.0);
    for (int m = mesh; m >= 3; --m) {
        const auto& sys = detail::level_system(m);
        sys.lu.solve(nodal);
        const int nc = (1 << (m - 1)) - 1;
        const int nw = 1 << (m - 1);
        std::vector<double> coarse(nc);
        for (int i = 1; i <= nc; ++i) coarse[i - 1] = nodal[2 * i - 1] / s2;
        const double wscale = std::exp2(-0.5 * m);  // 1 / 2^{m/2}
        const int j = m - 2;
        for (int k = 0; k < nw; ++k) {
            const double d = nodal[2 * k] * wscale;
            if (d != 0.0) out.set(WIndex{j, k}, d);
        }
        nodal = std::move(coarse);
    }
    for (int r = 0; r < 3; ++r)
        if (nodal[r] != 0.0) out.set(WIndex{0, r}, nodal[r] / ROOT_SCALE);
    return out;
}

} // namespace sheq
