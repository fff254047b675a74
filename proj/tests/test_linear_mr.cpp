#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <sheq/linear_mr.hpp>
#include <sheq/noise_path.hpp>

using namespace sheq;

namespace {

// decay rate fitted by least squares of log2(err) against the level index
double fitted_rate(const std::vector<double>& errs) {
    const double n = double(errs.size());
    double sx = 0, sy = 0, sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < errs.size(); ++i) {
        const double x = double(i), y = std::log2(errs[i]);
        sx += x; sy += y; sxy += x * y; sxx += x * x;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

// Ladder levels are mesh levels: h = 2^-lvl, n = 2^lvl - 1 dofs, so the
// scheme runs at wavelet depth lvl - 2.
TEST_CASE("spatial error closed form: pinned ladder values") {
    struct Suite {
        double rho, beta;
        bool coupled;             // N = 4^(lvl-1), K = 4 * 2^lvl; else N = 64, K = 1024
        std::vector<double> err;  // lvl = 3..8
        double rate;
    };
    const std::vector<Suite> suites = {
        {0.1, 0.5, true,
         {1.460473e-02, 9.801560e-03, 6.634349e-03, 4.510645e-03, 3.073750e-03, 2.097000e-03},
         0.5593},
        {1.3, 1.0, true,
         {5.587749e-03, 2.518039e-03, 1.132483e-03, 5.095343e-04, 2.293905e-04, 1.033140e-04},
         1.1516},
        {4.0, 2.0, false,
         {2.744010e-03, 6.858414e-04, 1.715093e-04, 4.288273e-05, 1.072153e-05, 2.671456e-06},
         2.0006},
    };
    for (const auto& s : suites) {
        CAPTURE(s.beta);
        std::vector<double> got;
        for (int lvl = 3; lvl <= 8; ++lvl) {
            const std::uint64_t N = s.coupled ? (std::uint64_t(1) << (2 * (lvl - 1))) : 64;
            const std::uint64_t K = s.coupled ? (std::uint64_t(4) << lvl) : 1024;
            CovarianceSpec cov(s.rho, K, s.beta);
            got.push_back(exact_convolution_error(lvl - 2, cov, TimeGrid{1.0, N}));
        }
        for (int i = 0; i < 6; ++i) {
            CAPTURE(i);
            CHECK(got[i] == Catch::Approx(s.err[i]).epsilon(1e-5));
        }
        CHECK(fitted_rate(got) == Catch::Approx(s.rate).margin(2e-3));
    }
}

TEST_CASE("temporal error closed form: pinned refinement values") {
    struct Suite {
        double rho, beta;
        std::vector<double> err;  // N = 8, 16, 32, 64, 128 against 16x finer
        double rate;
    };
    const std::vector<Suite> suites = {
        {0.1, 0.5,
         {1.384984e-01, 1.147005e-01, 9.483215e-02, 7.838347e-02, 6.478277e-02},
         0.2742},
        {1.3, 1.0,
         {1.041156e-01, 7.327667e-02, 5.034301e-02, 3.420513e-02, 2.311109e-02},
         0.5442},
    };
    for (const auto& s : suites) {
        CAPTURE(s.beta);
        CovarianceSpec cov(s.rho, 2048, s.beta);
        std::vector<double> got;
        for (std::uint64_t N = 8; N <= 128; N *= 2)
            got.push_back(exact_temporal_error(cov, 1.0, N, 16));
        for (int i = 0; i < 5; ++i) {
            CAPTURE(i);
            CHECK(got[i] == Catch::Approx(s.err[i]).epsilon(1e-5));
        }
        CHECK(fitted_rate(got) == Catch::Approx(s.rate).margin(2e-3));
    }
}

TEST_CASE("Monte Carlo final-step error agrees with the spatial closed form") {
    CovarianceSpec cov(1.3, 32, 1.0);
    TimeGrid grid{1.0, 16};
    const int J = 3, M = 48;
    double sum = 0.0, sum2 = 0.0;
    for (int m = 0; m < M; ++m) {
        auto path = sample_path(cov, grid, derive_path_seed(2026, std::uint64_t(m)));
        const auto res = run_convolution_path(J, cov, grid, path);
        const double e2 = res.err_sq.back();
        sum += e2;
        sum2 += e2 * e2;
    }
    const double mean = sum / M;
    const double stderr2 = std::sqrt((sum2 / M - mean * mean) / (M - 1));
    const double exact = exact_convolution_error(J, cov, grid);
    CHECK(std::abs(mean - exact * exact) <= 4.0 * stderr2);
}

TEST_CASE("Monte Carlo coarse/fine mode chains agree with the temporal closed form") {
    CovarianceSpec cov(1.3, 16, 1.0);
    const std::uint64_t N = 8, R = 4;
    TimeGrid grid{1.0, N};
    const int M = 64;
    std::vector<double> mean(N, 0.0), mean2(N, 0.0);
    for (int m = 0; m < M; ++m) {
        auto coarse = sample_path(cov, grid, derive_path_seed(31, std::uint64_t(m)));
        auto fine = refine_path(coarse, R);
        const double tau_c = grid.tau(), tau_f = tau_c / double(R);
        std::vector<double> x(cov.K, 0.0), y(cov.K, 0.0);
        for (std::uint64_t n = 0; n < N; ++n) {
            double err2 = 0.0;
            for (int k = 1; k <= int(cov.K); ++k) {
                x[k - 1] = euler_factor(tau_c, eigenvalue(k)) *
                           (x[k - 1] + coarse.increment(cov, k, n));
                for (std::uint64_t i = 0; i < R; ++i)
                    y[k - 1] = euler_factor(tau_f, eigenvalue(k)) *
                               (y[k - 1] + fine.increment(cov, k, n * R + i));
                const double d = x[k - 1] - y[k - 1];
                err2 += d * d;
            }
            mean[n] += err2 / M;
            mean2[n] += err2 * err2 / M;
        }
    }
    std::size_t worst = 0;
    for (std::uint64_t n = 1; n < N; ++n)
        if (mean[n] > mean[worst]) worst = n;
    const double se = std::sqrt((mean2[worst] - mean[worst] * mean[worst]) / (M - 1));
    const double exact = exact_temporal_error(cov, 1.0, N, R);
    CHECK(std::abs(mean[worst] - exact * exact) <= 4.0 * se);
}

TEST_CASE("noise load assembly matches the direct mode sum") {
    CovarianceSpec cov(1.3, 24, 1.0);
    TimeGrid grid{1.0, 4};
    const int n = 15;
    auto path = sample_path(cov, grid, 99);
    const auto load = ConvolutionScheme::increment_load(path, cov, 2, n);
    REQUIRE(int(load.size()) == n);
    for (int j = 1; j <= n; ++j) {
        double direct = 0.0;
        for (int k = 1; k <= int(cov.K); ++k)
            direct += path.increment(cov, k, 2) * fem::mode_load_factor(k, n) *
                      std::sin(k * PI * j / double(n + 1));
        CHECK(load[j - 1] == Catch::Approx(direct).margin(1e-12));
    }
}

TEST_CASE("scheme state: reference modes follow the damped recursion") {
    CovarianceSpec cov(1.3, 8, 1.0);
    TimeGrid grid{1.0, 4};
    auto path = sample_path(cov, grid, 7);
    ConvolutionScheme s(3, cov, grid);
    std::vector<double> manual(cov.K, 0.0);
    for (std::uint64_t n = 0; n < grid.N; ++n) {
        s.advance(path, n);
        for (int k = 1; k <= int(cov.K); ++k)
            manual[k - 1] = euler_factor(grid.tau(), eigenvalue(k)) *
                            (manual[k - 1] + path.increment(cov, k, n));
    }
    for (int k = 0; k < int(cov.K); ++k)
        CHECK(s.reference_modes()[k] == Catch::Approx(manual[k]).margin(1e-14));
}
