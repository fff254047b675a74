#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <map>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "../wavelet/basis.hpp"
#include "../wavelet/coeffs.hpp"

namespace sheq::adaptive {

using IndexSet = std::vector<WIndex>;

inline IndexSet enumerate_through(int jcap) {
    IndexSet s;
    for (int k = 0; k < 3; ++k) s.push_back({0, k});
    for (int j = 1; j <= jcap; ++j)
        for (int k = 0; k < level_count(j); ++k) s.push_back({j, k});
    return s;
}

inline void sort_unique(IndexSet& s) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
}

// Implicit-step bilinear form B = (.,.) + tau*kappa*(grad., grad.) over the
// hierarchical basis. Entries are exact cell-wise integrals; the diagonal is
// closed-form (uniform 3/8 mass norm plus the level stiffness diagonal).
struct ImplicitOperator {
    double tau = 1.0;
    double kappa = 1.0;

    double entry(const WIndex& a, const WIndex& b) const {
        return mass_entry(a, b) + tau * kappa * stiff_entry(a, b);
    }
    double diagonal(const WIndex& a) const {
        return WAVELET_NORM_SQ + tau * kappa * stiff_diagonal(a);
    }
    double scale(const WIndex& a) const { return std::sqrt(diagonal(a)); }
};

namespace detail {

// Conservative k-range of level-j functions whose support can meet [sa, sb].
inline std::pair<int, int> level_range(int j, double sa, double sb) {
    if (j == 0) return {0, 2};
    const double half = std::exp2(double(j + 1));  // 1/(2h)
    int lo = int(std::floor(sa * half)) - 2;
    int hi = int(std::ceil(sb * half)) + 1;
    lo = std::max(lo, 0);
    hi = std::min(hi, level_count(j) - 1);
    return {lo, hi};
}

} // namespace detail

// y_t = sum_mu B(t, mu) x_mu for each target t; per-level ordered range
// queries keep this proportional to actual support overlaps.
inline std::vector<double> apply_on_set(const ImplicitOperator& op, const WaveletCoeffs& x,
                                        const IndexSet& targets) {
    std::vector<double> y(targets.size(), 0.0);
    for (std::size_t t = 0; t < targets.size(); ++t) {
        const WIndex a = targets[t];
        const auto [sa, sb] = support(a);
        double acc = 0.0;
        for (int j = 0; j <= x.max_level(); ++j) {
            const auto& lvl = x.level(j);
            if (lvl.empty()) continue;
            const auto [lo, hi] = detail::level_range(j, sa, sb);
            for (auto it = lvl.lower_bound(lo); it != lvl.end() && it->first <= hi; ++it)
                acc += op.entry(a, {j, it->first}) * it->second;
        }
        y[t] = acc;
    }
    return y;
}

// Spectral data of the Jacobi-scaled form D^{-1} B D^{-1} restricted to all
// levels <= jcap. By interlacing the bounds hold for every subset drawn from
// those levels, so one dense eigensolve certifies the whole run at this
// resolution cap. Cached per (jcap, tau, kappa).
struct Calibration {
    double lam_min = 0.0;
    double lam_max = 0.0;
    double omega = 0.0;  // 2 / (lam_min + lam_max)
    int dim = 0;
};

inline const Calibration& calibrate(const ImplicitOperator& op, int jcap) {
    if (jcap > 8)
        throw AssumptionViolation("dense spectral calibration is capped at resolution 8");
    std::uint64_t tb, kb;
    std::memcpy(&tb, &op.tau, 8);
    std::memcpy(&kb, &op.kappa, 8);
    static std::map<std::tuple<int, std::uint64_t, std::uint64_t>, Calibration> cache;
    const auto key = std::make_tuple(jcap, tb, kb);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const IndexSet all = enumerate_through(jcap);
    const int d = int(all.size());
    std::vector<double> sc(d);
    for (int i = 0; i < d; ++i) sc[i] = op.scale(all[i]);
    Eigen::MatrixXd B(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = i; j < d; ++j) {
            const double v = op.entry(all[i], all[j]) / (sc[i] * sc[j]);
            B(i, j) = v;
            B(j, i) = v;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B, Eigen::EigenvaluesOnly);
    Calibration c;
    c.lam_min = es.eigenvalues()(0);
    c.lam_max = es.eigenvalues()(d - 1);
    c.omega = 2.0 / (c.lam_min + c.lam_max);
    c.dim = d;
    return cache.emplace(key, c).first->second;
}

// Extreme eigenvalues of the scaled mass Gram through level J: the frame
// bounds of the normalized basis in L2. Dense and exact up to J = 8; beyond
// that (up to the hard cap 12) measured by (shifted) power iteration, which is
// adequate because the bounds plateau - see riesz_plateau.
inline std::pair<double, double> riesz_constants(int J) {
    if (J > 12) throw AssumptionViolation("frame-bound probe capped at resolution 12");
    const ImplicitOperator mass_only{0.0, 0.0};
    if (J <= 8) {
        const Calibration& c = calibrate(mass_only, J);
        return {c.lam_min, c.lam_max};
    }
    static std::map<int, std::pair<double, double>> cache;
    if (auto it = cache.find(J); it != cache.end()) return it->second;

    // scaled Gram assembled sparse once; each sweep is then a plain matvec
    const IndexSet all = enumerate_through(J);
    const int d = int(all.size());
    const auto offset = [](int j) { return j == 0 ? 0 : dimension_through_level(j - 1); };
    std::vector<std::vector<std::pair<int, double>>> rows{std::size_t(d)};
    for (int r = 0; r < d; ++r) {
        const WIndex a = all[std::size_t(r)];
        const auto [sa, sb] = support(a);
        const double da = mass_only.scale(a);
        for (int j = 0; j <= J; ++j) {
            const auto [klo, khi] = detail::level_range(j, sa, sb);
            for (int k = klo; k <= khi; ++k) {
                const double v = mass_entry(a, {j, k});
                if (v != 0.0)
                    rows[std::size_t(r)].emplace_back(offset(j) + k,
                                                      v / (da * mass_only.scale({j, k})));
            }
        }
    }
    const auto rayleigh_power = [&](double shift) {
        std::vector<double> x(std::size_t(d), 0.0), y(std::size_t(d), 0.0);
        for (int i = 0; i < d; ++i)
            x[std::size_t(i)] = std::cos(0.7 * double(i) + 0.3);  // deterministic start
        double lam = 0.0;
        for (int it = 0; it < 400; ++it) {
            double num = 0.0, den = 0.0, nrm = 0.0;
            for (int r = 0; r < d; ++r) {
                double s = 0.0;
                for (const auto& [c, v] : rows[std::size_t(r)]) s += v * x[std::size_t(c)];
                if (shift != 0.0) s = shift * x[std::size_t(r)] - s;
                y[std::size_t(r)] = s;
                num += x[std::size_t(r)] * s;
                den += x[std::size_t(r)] * x[std::size_t(r)];
                nrm += s * s;
            }
            const double prev = lam;
            lam = num / den;
            const double inv = 1.0 / std::sqrt(nrm);
            for (int r = 0; r < d; ++r) x[std::size_t(r)] = y[std::size_t(r)] * inv;
            if (it > 20 && std::abs(lam - prev) < 1e-8 * std::abs(lam)) break;
        }
        return shift != 0.0 ? shift - lam : lam;
    };
    const double hi = rayleigh_power(0.0);
    const double lo = rayleigh_power(1.05 * hi);
    return cache.emplace(J, std::make_pair(lo, hi)).first->second;
}

// Relative drift of the frame bounds between successive resolutions; small
// values certify that the dense-level measurement speaks for finer levels too.
inline double riesz_plateau(int J) {
    const auto [lo0, hi0] = riesz_constants(J - 1);
    const auto [lo1, hi1] = riesz_constants(J);
    return std::max(std::abs(lo1 - lo0), std::abs(hi1 - hi0)) / hi1;
}

// Support extension used by the residual bound: the set itself, same-level
// neighbours, and children one level down.
inline IndexSet expand(const IndexSet& s) {
    IndexSet out;
    out.reserve(4 * s.size());
    for (const WIndex& a : s) {
        out.push_back(a);
        if (a.j >= 1) {
            if (a.k > 0) out.push_back({a.j, a.k - 1});
            if (a.k + 1 < level_count(a.j)) out.push_back({a.j, a.k + 1});
        } else {
            if (a.k > 0) out.push_back({0, a.k - 1});
            if (a.k < 2) out.push_back({0, a.k + 1});
        }
        for (const WIndex& c : children(a)) out.push_back(c);
    }
    sort_unique(out);
    return out;
}

} // namespace sheq::adaptive
