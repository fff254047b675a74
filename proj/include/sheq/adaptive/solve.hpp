#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "../core.hpp"
#include "../wavelet/basis.hpp"
#include "../wavelet/coeffs.hpp"
#include "nonlinear.hpp"
#include "operator.hpp"

namespace sheq::adaptive {

// Per-step accuracy targets for a whole trajectory, plus the geometric decay
// ratio of the inner residual tolerances inside each implicit solve.
struct ToleranceSchedule {
    std::vector<double> eps;   // H-norm target per time step
    double eta_rule = 0.7;     // in (0,1)

    double total() const {
        double s = 0.0;
        for (double e : eps) s += e;
        return s;
    }
    void validate() const {
        if (!(eta_rule > 0.0 && eta_rule < 1.0))
            throw AssumptionViolation("inner tolerance ratio must lie in (0,1)");
        for (double e : eps)
            if (!(e > 0.0)) throw AssumptionViolation("step tolerances must be positive");
    }
};

struct SolveReport {
    int iterations = 0;          // Richardson sweeps
    int refreshes = 0;           // nonlinearity re-evaluations
    double certified_error = 0;  // a-posteriori H-norm bound on the returned iterate
    double residual_norm = 0;    // last scaled-residual l2 norm over the active set
    std::size_t support = 0;     // nonzeros in the returned coefficient vector
    std::uint64_t work = 0;      // operator-entry evaluations + matvec nonzeros touched
};

inline IndexSet support_set(const WaveletCoeffs& v) {
    IndexSet s;
    s.reserve(v.size());
    v.for_each([&](const WIndex& a, double) { s.push_back(a); });
    return s;
}

// Ancestor closure: guarantees every coarse row overlapping a fine entry is
// part of the active set, so the unseen residual tail is confined to the
// spatial/finer fringe that the ring sentinel covers.
inline void tree_closure(IndexSet& s) {
    std::vector<WIndex> stack(s.begin(), s.end());
    while (!stack.empty()) {
        WIndex a = stack.back();
        stack.pop_back();
        if (a.j == 0) continue;
        WIndex p = parent(a);
        s.push_back(p);
        stack.push_back(p);
    }
    sort_unique(s);
}

inline IndexSet cap_filter(IndexSet s, int jcap) {
    s.erase(std::remove_if(s.begin(), s.end(), [&](const WIndex& a) { return a.j > jcap; }),
            s.end());
    return s;
}

// Exact application of the implicit operator at the requested targets. The
// operator is banded level-to-level, so the result is exact whenever the
// target set contains everything the caller wants to observe; tree-structured
// input is cheap to demand because the solver maintains it anyway.
inline std::vector<double> apply_operator(const ImplicitOperator& op, const WaveletCoeffs& v,
                                          const IndexSet& targets, bool demand_tree = false) {
    if (demand_tree && !v.is_tree())
        throw AssumptionViolation("operator application demanded a tree-structured input");
    return apply_on_set(op, v, targets);
}

namespace detail {

// Rows of the diagonally rescaled operator over a fixed (rows x cols) index
// pair, stored sparse so each Richardson sweep is a plain matvec. Rebuilt only
// when the active sets change (nonlinearity refresh or support growth).
struct ScaledRows {
    std::vector<std::vector<std::pair<int, double>>> rows;
    std::uint64_t nnz = 0;

    ScaledRows() = default;

    ScaledRows(const ImplicitOperator& op, const IndexSet& row_set, const IndexSet& col_set) {
        rows.resize(row_set.size());
        // per-level contiguous slices of col_set for range queries
        const int jmax = col_set.empty() ? -1 : col_set.back().j;
        std::vector<std::pair<std::size_t, std::size_t>> slice(std::size_t(jmax + 2), {0, 0});
        for (std::size_t i = 0; i < col_set.size();) {
            std::size_t b = i;
            while (i < col_set.size() && col_set[i].j == col_set[b].j) ++i;
            slice[std::size_t(col_set[b].j)] = {b, i};
        }
        for (std::size_t r = 0; r < row_set.size(); ++r) {
            const WIndex a = row_set[r];
            const auto [sa, sb] = support(a);
            const double da = op.scale(a);
            for (int j = 0; j <= jmax; ++j) {
                auto [b0, b1] = slice[std::size_t(j)];
                if (b0 == b1) continue;
                const auto [klo, khi] = level_range(j, sa, sb);
                if (klo > khi) continue;
                auto lo = std::lower_bound(col_set.begin() + long(b0), col_set.begin() + long(b1),
                                           WIndex{j, klo});
                for (auto it = lo; it != col_set.begin() + long(b1) && it->k <= khi; ++it) {
                    const double val = op.entry(a, *it);
                    if (val != 0.0)
                        rows[r].emplace_back(int(it - col_set.begin()), val / (da * op.scale(*it)));
                }
            }
            nnz += rows[r].size();
        }
    }

    void matvec(const std::vector<double>& x, std::vector<double>& y) const {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double s = 0.0;
            for (const auto& [c, v] : rows[r]) s += v * x[std::size_t(c)];
            y[r] = s;
        }
    }
};

}  // namespace detail

// Approximate scaled residual D^{-1}(M rhs - B v) on the expanded active set,
// with total l2 error <= eta. The budget is split evenly between building the
// right-hand side inexactly and coarsening the assembled residual. make_rhs
// receives an L2 tolerance and must return the right-hand-side function's
// wavelet coefficients accurate to it.
template <class RhsBuilder>
WaveletCoeffs residual_res(double eta, const ImplicitOperator& op, int jcap,
                           const WaveletCoeffs& v, RhsBuilder&& make_rhs) {
    if (!(eta > 0.0)) throw AssumptionViolation("residual tolerance must be positive");
    const Calibration& cal = calibrate(op, jcap);
    const double root_hi = std::sqrt(cal.lam_max);
    // rhs error delta in L2 perturbs the scaled residual by <= root_hi * delta
    WaveletCoeffs rhs = make_rhs(0.5 * eta / root_hi);

    IndexSet base = support_set(v);
    {
        IndexSet rs = cap_filter(support_set(rhs), jcap);
        base.insert(base.end(), rs.begin(), rs.end());
    }
    for (int j = 0; j <= std::min(2, jcap); ++j)
        for (int k = 0; k < level_count(j); ++k) base.push_back({j, k});
    tree_closure(base);
    base = cap_filter(base, jcap);
    IndexSet ext = cap_filter(expand(base), jcap);
    IndexSet ring = cap_filter(expand(ext), jcap);
    {
        IndexSet tmp;
        std::set_difference(ring.begin(), ring.end(), ext.begin(), ext.end(),
                            std::back_inserter(tmp));
        ring.swap(tmp);
    }
    IndexSet both;
    std::merge(ext.begin(), ext.end(), ring.begin(), ring.end(), std::back_inserter(both));

    const ImplicitOperator mass_only{0.0, 0.0};
    std::vector<double> mb = apply_on_set(mass_only, rhs, both);
    std::vector<double> bv = apply_on_set(op, v, both);
    WaveletCoeffs r;
    for (std::size_t i = 0; i < both.size(); ++i) {
        const double val = (mb[i] - bv[i]) / op.scale(both[i]);
        if (val != 0.0) r.set(both[i], val);
    }
    return coarsen(r, 0.5 * eta, /*tree_mode=*/false);
}

// One implicit backward-Euler step for the nonlinear substep,
//     (M + tau K) v = M (v_prev + tau f(v + w)),
// solved by damped Richardson iteration in diagonally rescaled wavelet
// coordinates with a fixed relaxation weight taken from the measured extreme
// eigenvalues of the rescaled operator. The nonlinear right-hand side is
// cached between refreshes; the staleness it introduces is tracked through the
// accumulated iterate drift and folded into the a-posteriori certificate, so
// the returned bound is valid for the iterate actually returned. Inner
// tolerances follow eta_i = eta_0 * eta_rule^i; the support is re-coarsened
// every few sweeps and once more at the end against the final error budget.
template <class F>
WaveletCoeffs solve_step(const ImplicitOperator& op, int jcap, const WaveletCoeffs& v_prev,
                         const std::vector<double>& w_nodal, int w_mesh, F&& f, double lip,
                         double eps, SolveReport& rep, double eta_rule = 0.7) {
    if (!(eps > 0.0)) throw AssumptionViolation("step tolerance must be positive");
    if (!(eta_rule > 0.0 && eta_rule < 1.0))
        throw AssumptionViolation("inner tolerance ratio must lie in (0,1)");
    rep = SolveReport{};

    const Calibration& cal = calibrate(op, jcap);
    const double root_hi = std::sqrt(cal.lam_max);
    const double riesz_up = 1.1 * root_hi;  // measured frame bound + 10% safety
    // Energy bound: e'(Bhat - tau L Mhat)e <= |e||r| and
    // (1-tau L) M + tau S >= (1-tau L)(M + tau S), so |e| <= |r| / ((1-tau L) lam_min).
    if (!(op.tau * lip < 1.0))
        throw AssumptionViolation("implicit step requires tau * Lipschitz < 1");
    const double mu_eff = (1.0 - op.tau * lip) * cal.lam_min;

    // Residual budget: certificate riesz_up * total / mu_eff must reach 0.6 eps,
    // leaving 0.3 eps for the final coarsening and the rest as slack.
    const double target_res = 0.6 * eps * mu_eff / riesz_up;
    const double tol_f = 0.25 * target_res / (root_hi * std::max(op.tau, 1e-300));
    const double eta_rhs = root_hi * op.tau * tol_f;  // rhs quadrature contribution

    const ImplicitOperator mass_only{0.0, 0.0};
    constexpr double RING_SENTINEL = 2.0;  // unseen-tail factor, validated a posteriori
    constexpr int MAX_SWEEPS = 800;
    constexpr int COARSEN_EVERY = 5;

    // iterate state, scaled coordinates over the current ext set
    WaveletCoeffs z;
    v_prev.for_each([&](const WIndex& a, double val) {
        if (a.j <= jcap) z.set(a, val * op.scale(a));
    });

    std::uint64_t ework = 0;
    double eta_i = 0.0;       // set from the first measured residual
    double last_total = 0.0;  // for the nonconvergence report
    bool certified = false;
    int sweeps = 0;

    while (!certified) {
        // ---- refresh epoch: rebuild nonlinearity, sets, and operator rows ----
        WaveletCoeffs v;
        z.for_each([&](const WIndex& a, double val) { v.set(a, val / op.scale(a)); });
        WaveletCoeffs g = eval_nonlinear(v, w_nodal, w_mesh, f, tol_f, jcap + 8, &ework);
        ++rep.refreshes;
        WaveletCoeffs rhs_fun = g;  // v_prev + tau * f(v + w)
        rhs_fun.for_each_mut([&](const WIndex&, double& val) { val *= op.tau; });
        rhs_fun.axpy(1.0, v_prev);

        IndexSet base = support_set(z);
        {
            IndexSet rs = cap_filter(support_set(rhs_fun), jcap);
            base.insert(base.end(), rs.begin(), rs.end());
        }
        for (int j = 0; j <= std::min(2, jcap); ++j)
            for (int k = 0; k < level_count(j); ++k) base.push_back({j, k});
        tree_closure(base);
        base = cap_filter(base, jcap);
        IndexSet ext = cap_filter(expand(base), jcap);
        IndexSet ring;
        {
            IndexSet grown = cap_filter(expand(ext), jcap);
            std::set_difference(grown.begin(), grown.end(), ext.begin(), ext.end(),
                                std::back_inserter(ring));
        }
        IndexSet both;
        std::merge(ext.begin(), ext.end(), ring.begin(), ring.end(), std::back_inserter(both));
        std::vector<char> is_ext(both.size(), 0);
        {
            std::size_t ei = 0;
            for (std::size_t i = 0; i < both.size(); ++i)
                if (ei < ext.size() && !(both[i] < ext[ei]) && !(ext[ei] < both[i])) {
                    is_ext[i] = 1;
                    ++ei;
                }
        }

        std::vector<double> bhat = apply_on_set(mass_only, rhs_fun, both);
        for (std::size_t i = 0; i < both.size(); ++i) bhat[i] /= op.scale(both[i]);
        detail::ScaledRows rows(op, both, ext);
        rep.work += rows.nnz + std::uint64_t(both.size()) * 8;

        std::vector<double> zv(ext.size(), 0.0);
        for (std::size_t i = 0; i < ext.size(); ++i) zv[i] = z.get(ext[i]);

        double drift = 0.0;  // l2 distance travelled since the refresh
        std::vector<double> bz(both.size()), r(both.size());

        for (;;) {
            rows.matvec(zv, bz);
            rep.work += rows.nnz;
            double s_ext = 0.0, s_ring = 0.0;
            for (std::size_t i = 0; i < both.size(); ++i) {
                r[i] = bhat[i] - bz[i];
                (is_ext[i] ? s_ext : s_ring) += r[i] * r[i];
            }
            const double nrm_ext = std::sqrt(s_ext), nrm_ring = std::sqrt(s_ring);
            const double stale = cal.lam_max * op.tau * lip * drift;
            const double total = nrm_ext + RING_SENTINEL * nrm_ring + eta_rhs + stale;
            last_total = total;
            rep.residual_norm = nrm_ext;
            if (eta_i == 0.0) eta_i = std::max(total, target_res);

            if (total <= target_res) {
                rep.certified_error = riesz_up * total / mu_eff;
                certified = true;
                break;
            }
            if (++sweeps > MAX_SWEEPS)
                throw NonconvergenceError("implicit step hit the sweep cap", last_total);

            double step_sq = 0.0;
            std::size_t ei = 0;
            for (std::size_t i = 0; i < both.size(); ++i)
                if (is_ext[i]) {
                    const double d = cal.omega * r[i];
                    zv[ei] += d;
                    step_sq += d * d;
                    ++ei;
                }
            drift += std::sqrt(step_sq);

            if (sweeps % COARSEN_EVERY == 0) {
                // in-epoch support trim; Richardson self-corrects the dropped
                // mass, the drift term covers the rhs staleness it causes
                double budget = 0.01 * eps / riesz_up;
                double budget_sq = budget * budget;
                std::vector<std::pair<double, std::size_t>> mag;
                mag.reserve(zv.size());
                for (std::size_t i = 0; i < zv.size(); ++i)
                    if (zv[i] != 0.0) mag.emplace_back(zv[i] * zv[i], i);
                std::sort(mag.begin(), mag.end());
                double acc = 0.0, dropped = 0.0;
                for (const auto& [e2, i] : mag) {
                    if (acc + e2 > budget_sq) break;
                    acc += e2;
                    zv[i] = 0.0;
                    dropped += e2;
                }
                drift += std::sqrt(dropped);
            }

            // staleness eats into the inner tolerance: refresh the cached
            // nonlinearity once the drift term approaches eta_i
            eta_i = std::max(eta_i * eta_rule, 0.02 * target_res);
            if (cal.lam_max * op.tau * lip * drift > 0.25 * std::max(eta_i, 0.1 * target_res))
                break;
        }

        z = WaveletCoeffs{};
        for (std::size_t i = 0; i < ext.size(); ++i)
            if (zv[i] != 0.0) z.set(ext[i], zv[i]);
    }

    rep.iterations = sweeps;
    rep.work += ework;

    // final coarsening against its 0.3 eps share, performed in the scaled
    // coordinates so the dropped mass converts to an H-norm increment directly
    WaveletCoeffs zc = coarsen(z, 0.3 * eps / riesz_up, /*tree_mode=*/true);
    double dropped_sq = std::max(0.0, z.l2_norm_sq() - zc.l2_norm_sq());
    rep.certified_error += riesz_up * std::sqrt(dropped_sq);

    WaveletCoeffs out;
    zc.for_each([&](const WIndex& a, double val) { out.set(a, val / op.scale(a)); });
    rep.support = out.size();
    return out;
}

}  // namespace sheq::adaptive
