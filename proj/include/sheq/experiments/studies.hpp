#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "../core.hpp"
#include "../covariance.hpp"
#include "../evolution.hpp"
#include "../fem.hpp"
#include "../fft.hpp"
#include "../linear_mr.hpp"
#include "../noise_path.hpp"
#include "../rng.hpp"
#include "../spectral.hpp"
#include "../time_grid.hpp"
#include "../wavelet/basis.hpp"
#include "../wavelet/filter_table.hpp"
#include "../wavelet/transforms.hpp"
#include "config.hpp"
#include "dense.hpp"
#include "fit.hpp"
#include "mc.hpp"
#include "report.hpp"

namespace sheq::experiments {

namespace detail {

inline std::string fmt(const char* f, double a) {
    char b[128];
    std::snprintf(b, sizeof(b), f, a);
    return b;
}
inline std::string fmt(const char* f, double a, double b2) {
    char b[160];
    std::snprintf(b, sizeof(b), f, a, b2);
    return b;
}
inline std::string fmt(const char* f, double a, double b2, double c) {
    char b[192];
    std::snprintf(b, sizeof(b), f, a, b2, c);
    return b;
}

inline void maybe_silence(const StudyConfig& cfg, NoisePath& p) {
    if (cfg.silence_noise) std::fill(p.xi.begin(), p.xi.end(), 0.0);
}

inline RateReport make_report(const std::string& name, const std::vector<double>& levels,
                              const std::vector<TrajectoryErrorStats>& st, bool pathmax,
                              double target, double tol) {
    RateReport r;
    r.study = name;
    std::vector<double> errs, ses;
    for (std::size_t i = 0; i < st.size(); ++i) {
        const auto v = pathmax ? st[i].rms_of_max() : st[i].max_rms();
        r.rows.push_back({levels[i], v.value, v.se});
        errs.push_back(v.value);
        ses.push_back(v.se);
    }
    // ladders whose gate is not a slope may legitimately run too short to fit
    try {
        r.fit = fit_rate(errs, levels, ses);
        r.has_fit = true;
    } catch (const AssumptionViolation&) {
        r.has_fit = false;
    }
    r.target_slope = target;
    r.slope_tol = tol;
    return r;
}

// z-score of a Monte Carlo mean against an exact value; guards se = 0
inline double zscore(double mc, double exact, double se) {
    const double d = mc - exact;
    if (se <= 0.0) return d == 0.0 ? 0.0 : 1e18;
    return d / se;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// rates-space: wavelet solution of the linear substep against its spectral
// twin on the same path, across dyadic mesh levels.  For beta < 2 the step
// count and mode count grow with the level (N = 4^(L-1), K = 2^(L+2)) so
// neither time discretization nor truncation pollutes the spatial ladder;
// at beta = 2 a fixed (N, K) from the config suffices.
// ---------------------------------------------------------------------------

struct SpaceLevelDesign {
    std::uint64_t N, K;
};

inline SpaceLevelDesign space_design(const StudyConfig& cfg, int L) {
    if (cfg.beta < 2.0)
        return {std::uint64_t(1) << (2 * (L - 1)), std::uint64_t(1) << (L + 2)};
    return {cfg.N_list.empty() ? 64 : cfg.N_list.front(), cfg.K};
}

inline StudyResult run_rates_space(const StudyConfig& cfg) {
    StudyResult res;
    res.config = cfg;
    if (cfg.J_list.empty()) throw AssumptionViolation("rates-space needs mesh levels");

    std::vector<double> levels;
    std::vector<TrajectoryErrorStats> st(cfg.J_list.size());
    for (std::size_t li = 0; li < cfg.J_list.size(); ++li) {
        const int L = cfg.J_list[li];
        levels.push_back(double(L));
        const SpaceLevelDesign d = space_design(cfg, L);
        const CovarianceSpec cov(cfg.rho, d.K, cfg.beta);
        const TimeGrid grid(cfg.T, d.N);
        double final_sum = 0.0, final_sumsq = 0.0;
        for (std::uint64_t m = 0; m < cfg.M; ++m) {
            NoisePath p = sample_path(cov, grid, derive_path_seed(cfg.seed, m));
            detail::maybe_silence(cfg, p);
            ConvolutionPathResult r = run_convolution_path(L - 2, cov, grid, p);
            final_sum += r.err_sq.back();
            final_sumsq += r.err_sq.back() * r.err_sq.back();
            st[li].add_path(r.err_sq);
        }
        // closed-form cross-check at the final node (exact for this scheme)
        if (!cfg.silence_noise && cfg.M >= 2) {
            const double e = exact_convolution_error(L - 2, cov, grid);
            const double exact_sq = e * e;
            const double mean = final_sum / double(cfg.M);
            const double var =
                std::max(final_sumsq - final_sum * final_sum / double(cfg.M), 0.0) /
                double(cfg.M - 1);
            const double se = std::sqrt(var / double(cfg.M));
            const double z = detail::zscore(mean, exact_sq, se);
            res.notes.push_back("rates-space L=" + std::to_string(L) +
                                detail::fmt(": final-node mean err^2 %.6e vs closed form %.6e (z=%.2f)",
                                            mean, exact_sq, z));
            if (std::abs(z) > 4.0) {
                res.flagged = true;
                res.notes.push_back("rates-space L=" + std::to_string(L) +
                                    ": closed-form cross-check failed (|z| > 4), flagged");
            }
        }
    }
    const double target = std::min(cfg.beta, 2.0);
    res.reports.push_back(detail::make_report("rates-space", levels, st, false, target, 0.25));
    res.reports.push_back(
        detail::make_report("rates-space+pathmax", levels, st, true, target, 0.0));
    res.scalars["space.slope"] = res.reports.front().fit.slope;
    return res;
}

// ---------------------------------------------------------------------------
// rates-time: spectral solutions of the full equation on one common Brownian
// path sampled at the coarsest grid and refined dyadically through the
// ladder; the reference is the same scheme at `refine` times the finest
// grid.  Errors are K-mode l2 distances at the coarse nodes.
// ---------------------------------------------------------------------------

inline StudyResult run_rates_time(const StudyConfig& cfg) {
    StudyResult res;
    res.config = cfg;
    const auto& Ns = cfg.N_list;
    if (Ns.empty()) throw AssumptionViolation("rates-time needs a step-count ladder");
    const CovarianceSpec cov(cfg.rho, cfg.K, cfg.beta);
    const Nonlinearity f = make_nonlinearity(cfg.f, cfg.f_scale);
    const SpectralField u0 = initial_field(cfg.u0, cfg.K);
    const std::uint64_t Nfin = Ns.back();

    std::vector<TrajectoryErrorStats> st(Ns.size());
    for (std::uint64_t m = 0; m < cfg.M; ++m) {
        NoisePath cur = sample_path(cov, TimeGrid(cfg.T, Ns.front()),
                                    derive_path_seed(cfg.seed, m));
        detail::maybe_silence(cfg, cur);
        std::vector<SpectralTrajectory> runs;
        for (std::uint64_t N : Ns) {
            if (cur.grid.N < N) {
                cur = refine_path(cur, N / cur.grid.N);
                detail::maybe_silence(cfg, cur);
            }
            runs.push_back(spectral_backward_euler(cov, f, u0, cur, cfg.quad_factor, 1));
        }
        NoisePath fine = refine_path(cur, cfg.refine);
        detail::maybe_silence(cfg, fine);
        const SpectralTrajectory ref =
            spectral_backward_euler(cov, f, u0, fine, cfg.quad_factor, cfg.refine);
        for (std::size_t i = 0; i < Ns.size(); ++i) {
            const std::uint64_t skip = Nfin / Ns[i];
            std::vector<double> err_sq(Ns[i], 0.0);
            for (std::uint64_t n = 1; n <= Ns[i]; ++n) {
                const auto& a = runs[i].at[n].c;
                const auto& b = ref.at[skip * n].c;
                double s = 0.0;
                for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
                err_sq[n - 1] = s;
            }
            st[i].add_path(err_sq);
        }
    }

    std::vector<double> levels;
    for (std::uint64_t N : Ns) levels.push_back(std::log2(double(N)));
    res.reports.push_back(detail::make_report("rates-time", levels, st, false, cfg.beta / 2.0, 0.15));
    res.reports.push_back(
        detail::make_report("rates-time+pathmax", levels, st, true, cfg.beta / 2.0, 0.0));
    res.scalars["time.slope"] = res.reports.front().fit.slope;

    // pure-convolution configs admit an exact per-level value; 4-sigma check
    if (f.lip == 0.0 && cfg.f == "zero" && cfg.u0 == "zero" && !cfg.silence_noise && cfg.M >= 2) {
        for (std::size_t i = 0; i < Ns.size(); ++i) {
            const double exact =
                exact_temporal_error(cov, cfg.T, Ns[i], (Nfin / Ns[i]) * cfg.refine);
            const auto v = st[i].max_rms();
            const double z = detail::zscore(v.value, exact, v.se);
            res.notes.push_back("rates-time N=" + std::to_string(Ns[i]) +
                                detail::fmt(": max-RMS %.6e vs closed form %.6e (z=%.2f)",
                                            v.value, exact, z));
            if (std::abs(z) > 4.0) {
                res.flagged = true;
                res.notes.push_back("rates-time N=" + std::to_string(Ns[i]) +
                                    ": closed-form cross-check failed (|z| > 4), flagged");
            }
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// rates-tol: the adaptive trajectory against the tolerance-zero dense
// companion on the same mesh and path, swept over per-trajectory budgets.
// Reports the accumulation certificate (1 - tau L)^-N * eps_total, the
// pathwise hard bound against it, and the pairwise decay ratios.
// ---------------------------------------------------------------------------

inline StudyResult run_rates_tol(const StudyConfig& cfg) {
    StudyResult res;
    res.config = cfg;
    if (cfg.J_list.empty() || cfg.N_list.empty() || cfg.eps_list.empty())
        throw AssumptionViolation("rates-tol needs a mesh level, a step count and a sweep");
    const int L = cfg.J_list.front();
    const std::uint64_t N = cfg.N_list.front();
    const double tau = cfg.T / double(N);
    const CovarianceSpec cov(cfg.rho, cfg.K, cfg.beta);
    const Nonlinearity f = make_nonlinearity(cfg.f, cfg.f_scale);
    const SpectralField u0 = initial_field(cfg.u0, cfg.K);
    const TimeGrid grid(cfg.T, N);
    const int n_dof = (1 << L) - 1;

    std::vector<TrajectoryErrorStats> st(cfg.eps_list.size());
    std::vector<double> worst_path_max(cfg.eps_list.size(), 0.0);
    for (std::uint64_t m = 0; m < cfg.M; ++m) {
        NoisePath p = sample_path(cov, grid, derive_path_seed(cfg.seed, m));
        detail::maybe_silence(cfg, p);
        const DenseRun dense = dense_trajectory(L - 2, cov, f, u0, p);
        for (std::size_t e = 0; e < cfg.eps_list.size(); ++e) {
            adaptive::ToleranceSchedule sched;
            sched.eps = split_tolerance(cfg.eps_list[e], N, cfg.eps_split);
            const NonlinearRun run = run_nonlinear(L - 2, cov, f, u0, p, sched, m);
            std::vector<double> err_sq(N, 0.0);
            double pmax = 0.0;
            std::vector<double> diff(n_dof, 0.0);
            for (std::uint64_t n = 1; n <= N; ++n) {
                for (int i = 0; i < n_dof; ++i) diff[i] = run.u[n][i] - dense.u[n][i];
                const double nrm = mass_norm(diff, n_dof);
                err_sq[n - 1] = nrm * nrm;
                pmax = std::max(pmax, nrm);
            }
            st[e].add_path(err_sq);
            worst_path_max[e] = std::max(worst_path_max[e], pmax);
            for (const auto& s : run.stats) res.stats.push_back(s);
        }
    }

    std::vector<double> levels;
    for (double e : cfg.eps_list) levels.push_back(-std::log2(e));
    res.reports.push_back(detail::make_report("rates-tol", levels, st, false, 1.0, 0.0));
    res.reports.push_back(detail::make_report("rates-tol+pathmax", levels, st, true, 1.0, 0.0));

    // certificate: per-step certified tolerances accumulate through the
    // contraction as d_n <= (1 - tau L)^-1 d_{n-1} + eps_n, so the
    // trajectory error is at most (1 - tau L)^-N * eps_total
    double margin_min = 1e300, hard_worst = 0.0;
    for (std::size_t e = 0; e < cfg.eps_list.size(); ++e) {
        const double bound = std::pow(1.0 - tau * f.lip, -double(N)) * cfg.eps_list[e];
        const auto v = st[e].max_rms();
        margin_min = std::min(margin_min, bound / v.value);
        hard_worst = std::max(hard_worst, worst_path_max[e] / bound);
        res.notes.push_back(detail::fmt("rates-tol eps=%.1e: max-RMS %.6e, certificate %.6e",
                                        cfg.eps_list[e], v.value, bound));
        if (worst_path_max[e] > bound) {
            res.flagged = true;
            res.notes.push_back(detail::fmt(
                "rates-tol eps=%.1e: pathwise max %.6e exceeds the certificate, flagged",
                cfg.eps_list[e], worst_path_max[e]));
        }
    }
    res.scalars["tol.cert_margin_min"] = margin_min;
    res.scalars["tol.pathwise_max_over_bound"] = hard_worst;

    // pairwise decay: error should track the budget at most linearly; a
    // ratio near 1 means the sweep hit a floor the budget no longer
    // controls -- that pair is inconclusive for linearity and flagged
    double pairs = 0.0, pairs_ok = 0.0;
    for (std::size_t e = 0; e + 1 < cfg.eps_list.size(); ++e) {
        const double s = cfg.eps_list[e + 1] / cfg.eps_list[e];
        const double r = st[e + 1].max_rms().value / st[e].max_rms().value;
        pairs += 1.0;
        if (r > 0.9) {
            res.flagged = true;
            res.notes.push_back(detail::fmt(
                "rates-tol pair %.1e -> %.1e: ratio %.3f, plateau (budget no longer dominant), flagged",
                cfg.eps_list[e], cfg.eps_list[e + 1], r));
        } else if (r >= 0.6 * s && r <= 1.05) {
            pairs_ok += 1.0;
            res.notes.push_back(detail::fmt("rates-tol pair ratio %.4f within [%.4f, 1.05]", r,
                                            0.6 * s));
        } else {
            res.notes.push_back(detail::fmt("rates-tol pair ratio %.4f outside [%.4f, 1.05]", r,
                                            0.6 * s));
        }
    }
    res.scalars["tol.pairs"] = pairs;
    res.scalars["tol.pairs_ok"] = pairs_ok;
    return res;
}

// ---------------------------------------------------------------------------
// hoelder: time regularity of the stochastic convolution from exact
// Ornstein-Uhlenbeck marginals on the grid.  The statistic per lag l is the
// increment energy E || w(t + l tau) - w(t) ||^2 averaged over every window
// start; the fitted exponent of its square root against log2(1/lag) is the
// pathwise Hoelder rate.
// ---------------------------------------------------------------------------

inline StudyResult run_hoelder(const StudyConfig& cfg) {
    StudyResult res;
    res.config = cfg;
    if (cfg.N_list.empty() || cfg.lag_list.empty())
        throw AssumptionViolation("hoelder needs a step count and a lag list");
    const std::uint64_t N = cfg.N_list.front();
    const double tau = cfg.T / double(N);
    const CovarianceSpec cov(cfg.rho, cfg.K, cfg.beta);

    std::vector<TrajectoryErrorStats> st(cfg.lag_list.size());
    std::vector<double> chain((N + 1) * cfg.K, 0.0);
    for (std::uint64_t m = 0; m < cfg.M; ++m) {
        const std::uint64_t seed = derive_path_seed(cfg.seed, m);
        for (std::uint64_t k = 1; k <= cfg.K; ++k) {
            const ExactModeMarginal step(tau, eigenvalue(k));
            NormalStream zs(seed, STREAM_PATH_BASE, std::uint32_t(k));
            const double q = cov.q(k);
            double x = 0.0;
            chain[(k - 1) * (N + 1)] = 0.0;
            for (std::uint64_t n = 1; n <= N; ++n) {
                x = step.advance(x, cfg.silence_noise ? 0.0 : zs.at(n - 1), q);
                chain[(k - 1) * (N + 1) + n] = x;
            }
        }
        for (std::size_t li = 0; li < cfg.lag_list.size(); ++li) {
            const std::uint64_t lag = cfg.lag_list[li];
            double acc = 0.0;
            for (std::uint64_t k = 0; k < cfg.K; ++k) {
                const double* row = &chain[k * (N + 1)];
                for (std::uint64_t s = 0; s + lag <= N; ++s) {
                    const double d = row[s + lag] - row[s];
                    acc += d * d;
                }
            }
            acc /= double(N + 1 - lag);
            st[li].add_path({acc});
        }
    }

    std::vector<double> levels;
    for (std::uint64_t lag : cfg.lag_list) levels.push_back(std::log2(double(N) / double(lag)));
    res.reports.push_back(
        detail::make_report("hoelder", levels, st, false, cfg.beta / 2.0, 0.1));
    res.scalars["hoelder.exponent"] = res.reports.front().fit.slope;
    for (std::size_t li = 0; li + 1 < cfg.lag_list.size(); ++li)
        if (st[li].max_rms().value > st[li + 1].max_rms().value) {
            res.flagged = true;
            res.notes.push_back("hoelder: increment energy not monotone in the lag, flagged");
        }
    res.notes.push_back(detail::fmt("hoelder: fitted exponent %.4f (target %.2f +- 0.10)",
                                    res.reports.front().fit.slope, cfg.beta / 2.0));
    return res;
}

// ---------------------------------------------------------------------------
// gronwall: stability of the nonlinear substep under perturbation of the
// convolution input.  Two spectral chains share everything except the w fed
// into the nonlinearity -- the K-mode reference w or the mesh-level solution
// w_J -- so their gap per level, divided by the w-error that caused it, must
// respect the discrete Gronwall constant 2 L T exp(2 L T).
// ---------------------------------------------------------------------------

inline StudyResult run_gronwall(const StudyConfig& cfg) {
    StudyResult res;
    res.config = cfg;
    if (cfg.J_list.empty() || cfg.N_list.empty())
        throw AssumptionViolation("gronwall needs mesh levels and a step count");
    const std::uint64_t N = cfg.N_list.front();
    const double tau = cfg.T / double(N);
    const CovarianceSpec cov(cfg.rho, cfg.K, cfg.beta);
    const Nonlinearity f = make_nonlinearity(cfg.f, cfg.f_scale);
    const SpectralField u0 = initial_field(cfg.u0, cfg.K);
    const TimeGrid grid(cfg.T, N);
    const int nq = cfg.quad_factor * int(cfg.K);
    const double bound = f.lip > 0.0 ? 2.0 * f.lip * cfg.T * std::exp(2.0 * f.lip * cfg.T) : 0.0;

    std::vector<double> levels, ratios;
    std::vector<TrajectoryErrorStats> num(cfg.J_list.size()), den(cfg.J_list.size());
    for (std::size_t li = 0; li < cfg.J_list.size(); ++li) {
        const int L = cfg.J_list[li];
        levels.push_back(double(L));
        for (std::uint64_t m = 0; m < cfg.M; ++m) {
            NoisePath p = sample_path(cov, grid, derive_path_seed(cfg.seed, m));
            detail::maybe_silence(cfg, p);
            ConvolutionScheme conv(L - 2, cov, grid);
            const int n_dof = conv.dim();
            std::vector<double> cb = u0.c, cw = u0.c;
            std::vector<double> wq_ref(nq, 0.0), wq_j(nq, 0.0);
            std::vector<double> err_num(N, 0.0), err_den(N, 0.0);
            for (std::uint64_t n = 1; n <= N; ++n) {
                err_den[n - 1] = conv.advance(p, n);
                spectral_to_nodal(conv.reference_modes(), wq_ref, nq);
                const std::vector<double>& wj = conv.nodal();
                for (int i = 0; i < nq; ++i)
                    wq_j[i] = fem::nodal_interp(wj, n_dof, double(i + 1) / double(nq + 1));
                const std::vector<double> rhs_b = cb;
                implicit_spectral_step(cb, rhs_b, tau, f, nq, &wq_ref);
                const std::vector<double> rhs_w = cw;
                implicit_spectral_step(cw, rhs_w, tau, f, nq, &wq_j);
                double s = 0.0;
                for (std::size_t k = 0; k < cb.size(); ++k) s += (cb[k] - cw[k]) * (cb[k] - cw[k]);
                err_num[n - 1] = s;
            }
            num[li].add_path(err_num);
            den[li].add_path(err_den);
        }
        const double den_val = den[li].max_rms().value;
        const double num_val = num[li].max_rms().value;
        const double ratio = den_val > 0.0 ? num_val / den_val : (num_val > 0.0 ? 1e300 : 0.0);
        ratios.push_back(ratio);
        res.notes.push_back("gronwall L=" + std::to_string(L) +
                            detail::fmt(": response ratio %.4f (bound %.4f)", ratio, bound));
    }
    res.reports.push_back(detail::make_report("gronwall", levels, num, false, 0.0, 0.0));
    res.reports.push_back(detail::make_report("gronwall+denom", levels, den, false, 0.0, 0.0));
    res.scalars["gronwall.bound"] = bound;
    res.scalars["gronwall.worst_ratio"] = *std::max_element(ratios.begin(), ratios.end());
    if (bound > 0.0 && res.scalars["gronwall.worst_ratio"] > bound) {
        res.flagged = true;
        res.notes.push_back("gronwall: response ratio exceeds the stability bound, flagged");
    }
    return res;
}

// ---------------------------------------------------------------------------
// full: the dominance matrix for the complete pipeline against a common-path
// mild reference.  Three one-knob ladders -- refine only the step count,
// only the mesh, only the tolerance budget -- must each descend and then
// plateau at the floor the frozen knobs predict; the balanced ladder
// tightens all three together and must follow the temporal rate.
// ---------------------------------------------------------------------------

namespace detail {

struct KnobPoint {
    double level;
    std::uint64_t N, K;
    int L;
    double eps_total;
};

struct KnobLadder {
    std::string name;
    double beta, rho;
    std::string u0;
    double target_slope = 0.0, slope_tol = 0.0;
    bool gate_slope = false;
    std::vector<KnobPoint> pts;
};

}  // namespace detail

inline StudyResult run_full(const StudyConfig& cfg) {
    StudyResult res;
    res.config = cfg;
    const Nonlinearity f = make_nonlinearity(cfg.f, cfg.f_scale);

    std::vector<detail::KnobLadder> ladders;
    {
        detail::KnobLadder tk{"full+tau", cfg.beta, cfg.rho, "bump", 0, 0, false, {}};
        for (std::uint64_t N : {8ull, 32ull, 128ull, 512ull, 2048ull})
            tk.pts.push_back({std::log2(double(N)), N, 256, 3, 1e-3});
        ladders.push_back(tk);

        detail::KnobLadder sk{"full+space", 2.0, 4.0, "bump", 0, 0, false, {}};
        for (int L : {3, 4, 5, 6}) sk.pts.push_back({double(L), 256, 512, L, 1e-4});
        ladders.push_back(sk);

        detail::KnobLadder ek{"full+tol", cfg.beta, cfg.rho, "mode1", 0, 0, false, {}};
        for (double e : {3.0, 1.0, 0.3, 0.1, 0.03, 0.01})
            ek.pts.push_back({-std::log2(e), 16, 256, 4, e});
        ladders.push_back(ek);

        detail::KnobLadder bk{"full+balanced", cfg.beta, cfg.rho, "bump",
                              cfg.beta / 2.0,  0.2,      true,  {}};
        for (int L : cfg.J_list) {
            const std::uint64_t N = std::uint64_t(1) << (2 * (L - 1));
            const std::uint64_t K = std::uint64_t(1) << (L + 2);
            bk.pts.push_back({std::log2(double(N)), N, K, L, 0.0});  // eps filled below
        }
        ladders.push_back(bk);
    }

    std::uint64_t path_counter = 0;
    for (auto& lad : ladders) {
        std::vector<double> levels, preds;
        std::vector<TrajectoryErrorStats> st(lad.pts.size());
        for (std::size_t pi = 0; pi < lad.pts.size(); ++pi) {
            auto& pt = lad.pts[pi];
            const CovarianceSpec cov(lad.rho, pt.K, lad.beta);
            const TimeGrid grid(cfg.T, pt.N);
            const SpectralField u0 = initial_field(lad.u0, pt.K);
            const double Et = exact_temporal_error(cov, cfg.T, pt.N, cfg.refine);
            const double Es = exact_convolution_error(pt.L - 2, cov, grid);
            if (lad.name == "full+balanced" && pt.eps_total == 0.0)
                pt.eps_total = 0.2 * std::sqrt(Et * Et + Es * Es);
            const double pred = std::sqrt(Et * Et + Es * Es) + pt.eps_total;
            levels.push_back(pt.level);
            preds.push_back(pred);

            const int n_dof = (1 << pt.L) - 1;
            fem::SpectralErrorForm form(n_dof);
            for (std::uint64_t m = 0; m < cfg.M; ++m) {
                NoisePath p = sample_path(cov, grid, derive_path_seed(cfg.seed, m));
                detail::maybe_silence(cfg, p);
                adaptive::ToleranceSchedule sched;
                sched.eps = split_tolerance(pt.eps_total, pt.N, cfg.eps_split);
                const NonlinearRun run =
                    run_nonlinear(pt.L - 2, cov, f, u0, p, sched, path_counter);
                const SpectralTrajectory ref =
                    mild_reference(cov, f, u0, p, cfg.refine, cfg.quad_factor);
                std::vector<double> err_sq(pt.N, 0.0);
                for (std::uint64_t n = 1; n <= pt.N; ++n)
                    err_sq[n - 1] = std::max(form.squared(run.u[n], ref.at[n].c), 0.0);
                st[pi].add_path(err_sq);
                for (const auto& s : run.stats) res.stats.push_back(s);
                ++path_counter;
            }
            const auto v = st[pi].max_rms();
            res.notes.push_back(lad.name +
                                detail::fmt(" level %g: ", pt.level) +
                                detail::fmt("measured %.6e, predicted floor %.6e", v.value, pred));
        }

        RateReport rep;
        rep.study = lad.name;
        std::vector<double> errs, ses;
        for (std::size_t pi = 0; pi < lad.pts.size(); ++pi) {
            const auto v = st[pi].max_rms();
            rep.rows.push_back({levels[pi], v.value, v.se});
            errs.push_back(v.value);
            ses.push_back(v.se);
        }
        if (lad.gate_slope) {
            rep.fit = fit_rate(errs, levels, ses);  // short balanced ladder is a config error
            rep.has_fit = true;
            rep.target_slope = lad.target_slope;
            rep.slope_tol = lad.slope_tol;
            res.scalars["balanced.slope"] = rep.fit.slope;
            bool monotone = true;
            for (std::size_t pi = 0; pi + 1 < errs.size(); ++pi) {
                const double slack = 3.0 * (ses[pi] + ses[pi + 1]);
                if (errs[pi + 1] > errs[pi] + slack) monotone = false;
            }
            res.scalars["balanced.monotone"] = monotone ? 1.0 : 0.0;
            if (!monotone) {
                res.flagged = true;
                res.notes.push_back("full+balanced: error not monotone within noise, flagged");
            }
        } else {
            const std::string key = lad.name.substr(lad.name.find('+') + 1);
            const double reduction = errs.front() / errs.back();
            const double plateau_ratio = errs.back() / preds.back();
            res.scalars[key + ".reduction"] = reduction;
            res.scalars[key + ".plateau_ratio"] = plateau_ratio;
            res.notes.push_back(lad.name +
                                detail::fmt(": reduction %.2fx, plateau at %.2fx the predicted floor",
                                            reduction, plateau_ratio));
            if (reduction < 2.0 || plateau_ratio < 0.3 || plateau_ratio > 3.0) {
                res.flagged = true;
                res.notes.push_back(lad.name + ": dominance check failure (knob not dominant "
                                               "where predicted -> inconclusive), flagged");
            }
        }
        res.reports.push_back(std::move(rep));
    }
    return res;
}

// ---------------------------------------------------------------------------
// basis-check: structural health of the wavelet machinery.  Biorthogonality
// of the assembled Gram against its own factorization, exactness of the
// analysis/synthesis round trip, the Ritz projection convergence ladder, and
// the filter table against the compiled constants.
// ---------------------------------------------------------------------------

inline StudyResult run_basis_check(const StudyConfig& cfg) {
    StudyResult res;
    res.config = cfg;

    // Gram assembled from closed-form pairings through level 5, solved
    // against itself: the identity residual is the biorthogonality defect
    {
        const int jmax = 5;
        std::vector<WIndex> idx;
        for (int j = 0; j <= jmax; ++j)
            for (int k = 0; k < level_count(j); ++k) idx.push_back({j, k});
        const int d = int(idx.size());
        Eigen::MatrixXd G(d, d);
        for (int a = 0; a < d; ++a)
            for (int b = a; b < d; ++b) G(a, b) = G(b, a) = mass_entry(idx[a], idx[b]);
        const Eigen::MatrixXd P = G.ldlt().solve(G);
        double resid = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                resid = std::max(resid, std::abs(P(a, b) - (a == b ? 1.0 : 0.0)));
        res.scalars["basis.biorth_residual"] = resid;
        res.notes.push_back(detail::fmt("basis-check: biorthogonality residual %.3e through level 5",
                                        resid));
    }

    // analysis/synthesis round trip on a dense random vector
    {
        const int mesh = 10;
        const int n = (1 << mesh) - 1;
        NormalStream zs(cfg.seed, 0x77u, 0);
        std::vector<double> nodal(n, 0.0);
        for (int i = 0; i < n; ++i) nodal[i] = zs.at(i);
        const WaveletCoeffs c = fwt(nodal, mesh);
        const std::vector<double> back = ifwt(c, mesh);
        double err = 0.0;
        for (int i = 0; i < n; ++i) err = std::max(err, std::abs(back[i] - nodal[i]));
        res.scalars["basis.roundtrip_error"] = err;
        res.notes.push_back(detail::fmt("basis-check: transform round-trip error %.3e", err));
    }

    // Ritz projection ladder: second-order convergence on two smooth targets
    {
        struct Target {
            const char* tag;
            double (*exact)(double);
            double (*load)(double);
        };
        static const Target targets[2] = {
            {"ritz-poly", [](double x) { return x * (1.0 - x); }, [](double) { return 2.0; }},
            {"ritz-sine", [](double x) { return std::sin(PI * x); },
             [](double x) { return PI * PI * std::sin(PI * x); }},
        };
        for (const auto& t : targets) {
            RateReport rep;
            rep.study = std::string("basis-check+") + t.tag;
            std::vector<double> errs, levels;
            for (int J = 3; J <= 9; ++J) {
                const int n = (1 << J) - 1;
                const std::vector<double> u = fem::poisson_solve(t.load, n);
                const double err = fem::nodal_l2_error(u, n, t.exact);
                rep.rows.push_back({double(J), err, 0.0});
                errs.push_back(err);
                levels.push_back(double(J));
            }
            rep.fit = fit_rate(errs, levels);
            rep.has_fit = true;
            rep.target_slope = 2.0;
            rep.slope_tol = 0.15;
            res.scalars[std::string("basis.") + t.tag + "_slope"] = rep.fit.slope;
            res.notes.push_back(std::string("basis-check: ") + t.tag +
                                detail::fmt(" slope %.4f (target 2.00 +- 0.15)", rep.fit.slope));
            res.reports.push_back(std::move(rep));
        }
    }

    // filter table: canonical serialization parses and matches the compiled
    // constants entry by entry
    {
        std::istringstream in(canonical_filter_table());
        const FilterTable t = parse_filter_table(in);
        verify_filter_table(t);
        res.scalars["basis.filter_table_ok"] = 1.0;
        res.notes.push_back("basis-check: filter table matches the compiled constants (format 1)");
    }
    return res;
}

// ---------------------------------------------------------------------------

inline StudyResult run_study(const StudyConfig& cfg_in) {
    StudyConfig cfg = cfg_in;
    apply_study_defaults(cfg);
    validate(cfg);
    if (cfg.study == "rates-space") return run_rates_space(cfg);
    if (cfg.study == "rates-time") return run_rates_time(cfg);
    if (cfg.study == "rates-tol") return run_rates_tol(cfg);
    if (cfg.study == "hoelder") return run_hoelder(cfg);
    if (cfg.study == "gronwall") return run_gronwall(cfg);
    if (cfg.study == "full") return run_full(cfg);
    if (cfg.study == "basis-check") return run_basis_check(cfg);
    throw AssumptionViolation("unknown study kind: '" + cfg.study + "'");
}

// Stated gates and design choices for the echo file; every number a reader
// might check a report against appears here.
inline std::vector<std::string> design_lines(const StudyConfig& cfg) {
    std::vector<std::string> d;
    d.push_back("error functional: max over time nodes of the path-RMS; the pathwise");
    d.push_back("  surrogate (RMS over paths of the per-path max) is the +pathmax ladder");
    if (cfg.study == "rates-space") {
        d.push_back("gate: fitted decay of max-RMS vs mesh level = min(beta, 2) +- 0.25");
        if (cfg.beta < 2.0)
            d.push_back("design: level L runs N = 4^(L-1) steps with K = 2^(L+2) modes");
        else
            d.push_back("design: fixed N and K from the config at every level");
        d.push_back("cross-check: closed-form final-node error per level, 4-sigma flag");
    } else if (cfg.study == "rates-time") {
        d.push_back("gate: fitted decay of max-RMS vs log2(N) = beta/2 +- 0.15");
        d.push_back("design: one Brownian path per sample, refined dyadically through the");
        d.push_back("  ladder; reference = same scheme at refine x the finest grid");
    } else if (cfg.study == "rates-tol") {
        d.push_back("hard bound: pathwise max error <= (1 - tau*L)^-N * eps_total, always");
        d.push_back("gate: max-RMS <= certificate / 2 at every budget");
        d.push_back("gate: pairwise error ratio in [0.6*s, 1.05] for budget ratio s,");
        d.push_back("  unless the pair plateaus (ratio > 0.9) -- then flagged inconclusive");
        d.push_back("slope target 1.0 is the at-most-linear ceiling, not a fit gate");
    } else if (cfg.study == "hoelder") {
        d.push_back("gate: fitted exponent of RMS increment vs log2(1/lag) = beta/2 +- 0.10");
        d.push_back("design: exact OU marginals on the grid; energy averaged over all");
        d.push_back("  window starts and all modes; lags are grid-aligned multiples of tau");
    } else if (cfg.study == "gronwall") {
        d.push_back("gate: max-RMS(vbar - v) / max-RMS(w_ref - w_J) <= 2*L*T*exp(2*L*T)");
        d.push_back("design: twin spectral chains differing only in the w fed to the");
        d.push_back("  nonlinearity; denominator is the convolution error that caused the gap");
    } else if (cfg.study == "full") {
        d.push_back("one-knob gates: error reduction >= 2x from the first rung, final rung");
        d.push_back("  within [0.3, 3] x the closed-form floor of the frozen knobs");
        d.push_back("full+tau: mesh 3, budget 1e-3, N in {8..2048} (temporal knob)");
        d.push_back("full+space: beta=2 rho=4, N=256, budget 1e-4, mesh 3..6 (spatial knob)");
        d.push_back("full+tol: N=16, mesh 4, budgets 3 .. 0.01 (tolerance knob)");
        d.push_back("full+balanced gate: slope beta/2 +- 0.2 vs log2(1/tau), monotone");
        d.push_back("  design: mesh L with N = 4^(L-1), K = 2^(L+2), budget 0.2 x floor");
    } else if (cfg.study == "basis-check") {
        d.push_back("gates: biorthogonality residual <= 1e-8 through level 5; transform");
        d.push_back("  round-trip <= 1e-12; Ritz ladder slopes 2.0 +- 0.15 over mesh 3..9;");
        d.push_back("  filter table identical to the compiled constants");
    }
    return d;
}

}  // namespace sheq::experiments
