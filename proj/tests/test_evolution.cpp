#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include <sheq/evolution.hpp>

using namespace sheq;

namespace {

Nonlinearity linear_reaction(double alpha) {
    return {"linear", [alpha](double u) { return alpha * u; }, std::abs(alpha)};
}

NoisePath silent_path(const CovarianceSpec& cov, const TimeGrid& grid) {
    NoisePath p = sample_path(cov, grid, 1);
    std::fill(p.xi.begin(), p.xi.end(), 0.0);
    return p;
}

} // namespace

TEST_CASE("implicit spectral step solves the linear fixed point exactly") {
    const int K = 8, nq = 16;
    const double tau = 0.1, alpha = 0.5;
    std::mt19937 gen(17u);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> rhs(K);
    for (double& v : rhs) v = u(gen);

    SECTION("plain") {
        std::vector<double> c(K, 0.0);
        const int its = implicit_spectral_step(c, rhs, tau, linear_reaction(alpha), nq);
        CHECK(its >= 1);
        CHECK(its <= 300);
        for (int k = 1; k <= K; ++k) {
            const double r = euler_factor(tau, eigenvalue(k));
            CHECK(c[k - 1] == Catch::Approx(r * rhs[k - 1] / (1.0 - tau * alpha * r)).margin(2e-12));
        }
    }
    SECTION("with an additive nodal shift") {
        std::vector<double> wc(K, 0.0);
        wc[1] = 0.7;  // second sine mode
        std::vector<double> w_quad;
        spectral_to_nodal(wc, w_quad, nq);
        std::vector<double> c(K, 0.0);
        implicit_spectral_step(c, rhs, tau, linear_reaction(alpha), nq, &w_quad);
        for (int k = 1; k <= K; ++k) {
            const double r = euler_factor(tau, eigenvalue(k));
            const double expect =
                r * (rhs[k - 1] + tau * alpha * wc[k - 1]) / (1.0 - tau * alpha * r);
            CHECK(c[k - 1] == Catch::Approx(expect).margin(2e-12));
        }
    }
}

TEST_CASE("noise-driven linear chain matches the mode recursion") {
    CovarianceSpec cov(1.3, 16, 1.0);
    TimeGrid grid{1.0, 8};
    const auto path = sample_path(cov, grid, 404);
    const auto u0 = initial_field("bump", cov.K);
    const auto traj = spectral_backward_euler(cov, make_nonlinearity("zero"), u0, path);
    REQUIRE(traj.at.size() == grid.N + 1);
    CHECK(traj.stride == 1);
    std::vector<double> manual(u0.c);
    for (std::uint64_t n = 0; n < grid.N; ++n)
        for (int k = 1; k <= int(cov.K); ++k)
            manual[k - 1] = euler_factor(grid.tau(), eigenvalue(k)) *
                            (manual[k - 1] + path.increment(cov, k, n));
    for (int k = 0; k < int(cov.K); ++k)
        CHECK(traj.at.back().c[k] == Catch::Approx(manual[k]).margin(1e-13));
}

TEST_CASE("deterministic linear reaction: closed-form chain and first-order decay") {
    CovarianceSpec cov(1.3, 32, 1.0);
    const double alpha = 0.5, T = 1.0;
    const auto f = linear_reaction(alpha);
    const auto u0 = initial_field("bump", cov.K);

    // one chain against the per-mode closed form
    {
        TimeGrid grid{T, 8};
        const auto traj = spectral_backward_euler(cov, f, u0, silent_path(cov, grid));
        for (int k = 1; k <= int(cov.K); ++k) {
            const double r = euler_factor(grid.tau(), eigenvalue(k));
            const double gain = std::pow(r / (1.0 - grid.tau() * alpha * r), 8.0);
            CHECK(traj.at.back().c[k - 1] == Catch::Approx(gain * u0.c[k - 1]).margin(1e-11));
        }
    }
    // endpoint error against the semigroup decays at first order once
    // tau * lambda_1 is small (the window 8..64 is still pre-asymptotic)
    std::vector<double> errs;
    for (std::uint64_t N : {64, 128, 256, 512}) {
        TimeGrid grid{T, N};
        const auto traj = spectral_backward_euler(cov, f, u0, silent_path(cov, grid));
        double e2 = 0.0;
        for (int k = 1; k <= int(cov.K); ++k) {
            const double exact = std::exp((alpha - eigenvalue(k)) * T) * u0.c[k - 1];
            const double d = traj.at.back().c[k - 1] - exact;
            e2 += d * d;
        }
        errs.push_back(std::sqrt(e2));
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
        num += std::log2(errs[i] / errs[i + 1]);
        den += 1.0;
    }
    CHECK(num / den == Catch::Approx(1.0).margin(0.1));
}

TEST_CASE("refined reference runs the same chain on the fine grid") {
    CovarianceSpec cov(1.3, 8, 1.0);
    TimeGrid grid{1.0, 4};
    const auto path = sample_path(cov, grid, 77);
    const auto u0 = initial_field("mode1", cov.K);
    CHECK_THROWS_AS(mild_reference(cov, make_nonlinearity("zero"), u0, path, 8),
                    AssumptionViolation);
    const auto ref = mild_reference(cov, make_nonlinearity("zero"), u0, path, 16);
    REQUIRE(ref.at.size() == grid.N + 1);
    CHECK(ref.stride == 16);
    const NoisePath fine = refine_path(path, 16);
    std::vector<double> manual(u0.c);
    for (std::uint64_t m = 0; m < 16 * grid.N; ++m) {
        for (int k = 1; k <= int(cov.K); ++k)
            manual[k - 1] = euler_factor(fine.grid.tau(), eigenvalue(k)) *
                            (manual[k - 1] + fine.increment(cov, k, m));
        if ((m + 1) % 16 == 0)
            for (int k = 0; k < int(cov.K); ++k)
                CHECK(ref.at[(m + 1) / 16].c[k] == Catch::Approx(manual[k]).margin(1e-13));
    }
}

TEST_CASE("split adaptive run lands near the fully spectral solve") {
    CovarianceSpec cov(1.3, 64, 1.0);
    TimeGrid grid{1.0, 8};
    const auto path = sample_path(cov, grid, 2112);
    const auto f = make_nonlinearity("bounded", 0.5);
    const auto u0 = initial_field("bump", cov.K);
    adaptive::ToleranceSchedule sched;
    sched.eps.assign(grid.N, 1e-5);

    const int J = 4, n_dof = (1 << (J + 2)) - 1;
    const auto run = run_nonlinear(J, cov, f, u0, path, sched, 3);
    REQUIRE(run.stats.size() == grid.N);
    REQUIRE(run.u.size() == grid.N + 1);
    REQUIRE(run.conv_err_sq.size() == grid.N);
    for (std::size_t i = 0; i < run.stats.size(); ++i) {
        CHECK(run.stats[i].path_id == 3);
        CHECK(run.stats[i].n == i + 1);
        CHECK(run.stats[i].eps_n == Catch::Approx(1e-5));
        CHECK(run.stats[i].support > 0);
        CHECK(run.stats[i].iterations > 0);
        CHECK(run.stats[i].op_count > 0);
    }
    CHECK(run.v.front().is_tree());

    const auto traj = spectral_backward_euler(cov, f, u0, path);
    double gap2 = 0.0;
    for (int i = 1; i <= n_dof; ++i) {
        const double x = double(i) / (n_dof + 1);
        double s = 0.0;
        for (int k = 1; k <= int(cov.K); ++k)
            s += traj.at.back().c[k - 1] * eval_eigenfunction(k, x);
        const double d = run.u.back()[std::size_t(i - 1)] - s;
        gap2 += d * d / (n_dof + 1);
    }
    // spatial floor of the linear substep plus the certified budget, with
    // generous slack for the single-path draw
    CHECK(std::sqrt(gap2) < 0.01);
}

TEST_CASE("evolution guard rails") {
    CovarianceSpec cov(1.3, 8, 1.0);
    TimeGrid grid{1.0, 4};
    const auto path = sample_path(cov, grid, 5);
    const auto u0 = initial_field("zero", cov.K);
    CHECK_THROWS_AS(make_nonlinearity("cubic"), AssumptionViolation);
    CHECK_THROWS_AS(initial_field("spike", 8), AssumptionViolation);
    CHECK_THROWS_AS(
        spectral_backward_euler(cov, make_nonlinearity("sine", 2.1), u0, path),
        AssumptionViolation);
    adaptive::ToleranceSchedule sched;
    sched.eps.assign(3, 1e-4);  // wrong length
    CHECK_THROWS_AS(run_nonlinear(2, cov, make_nonlinearity("zero"), u0, path, sched),
                    AssumptionViolation);

    // bump field synthesizes x(1-x)
    const auto bump = initial_field("bump", 64);
    double mid = 0.0;
    for (int k = 1; k <= 64; ++k) mid += bump.c[k - 1] * eval_eigenfunction(k, 0.5);
    CHECK(mid == Catch::Approx(0.25).margin(1e-6));
}
