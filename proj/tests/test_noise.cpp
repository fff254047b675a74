#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>

#include "sheq/noise_path.hpp"

using namespace sheq;

TEST_CASE("increment statistics match the covariance weights") {
    CovarianceSpec cov(1.3, 8, 1.0);
    TimeGrid grid(1.0, 4);
    const int M = 20000;
    double m1 = 0.0, m2 = 0.0;
    for (int p = 0; p < M; ++p) {
        NoisePath path = sample_path(cov, grid, derive_path_seed(7, std::uint64_t(p)));
        const double inc = path.increment(cov, 3, 1);
        m1 += inc;
        m2 += inc * inc;
    }
    m1 /= M;
    m2 /= M;
    const double var = cov.q(3) * grid.tau();
    CHECK(std::abs(m1) < 4.0 * std::sqrt(var / M));
    CHECK(std::abs(m2 - var) < 4.0 * var * std::sqrt(2.0 / M));
}

TEST_CASE("refinement is consistent: fine increments sum to the coarse ones") {
    CovarianceSpec cov(2.0, 16, 1.0);
    TimeGrid grid(1.0, 8);
    NoisePath coarse = sample_path(cov, grid, 123);
    NoisePath fine = refine_path(coarse, 4);
    REQUIRE(fine.grid.N == 32);
    for (std::uint64_t k = 1; k <= cov.K; ++k)
        for (std::uint64_t n = 0; n < grid.N; ++n) {
            double s = 0.0;
            for (std::uint64_t m = 0; m < 4; ++m) s += fine.increment(cov, k, 4 * n + m);
            CHECK(s == Catch::Approx(coarse.increment(cov, k, n)).margin(1e-12));
        }
}

TEST_CASE("two halvings equal one quartering exactly") {
    CovarianceSpec cov(1.3, 4, 1.0);
    TimeGrid grid(0.5, 4);
    NoisePath p = sample_path(cov, grid, 5);
    NoisePath a = refine_path(p, 4);
    NoisePath b = refine_path(refine_path(p, 2), 2);
    REQUIRE(a.grid.N == b.grid.N);
    REQUIRE(a.level == b.level);
    for (std::uint64_t k = 1; k <= cov.K; ++k)
        for (std::uint64_t n = 0; n < a.grid.N; ++n)
            CHECK(a.increment(cov, k, n) == b.increment(cov, k, n));
}

TEST_CASE("dump and load round-trip bit-exactly, bad magic rejected") {
    CovarianceSpec cov(0.5, 6, 0.5);
    TimeGrid grid(1.0, 5);
    NoisePath p = sample_path(cov, grid, 2024);
    const char* fname = "noise_roundtrip.bin";
    dump_path(p, fname);
    NoisePath q = load_path(fname);
    CHECK(q.seed == p.seed);
    CHECK(q.K == p.K);
    CHECK(q.grid.N == p.grid.N);
    for (std::uint64_t k = 1; k <= cov.K; ++k)
        for (std::uint64_t n = 0; n < grid.N; ++n)
            CHECK(q.increment(cov, k, n) == p.increment(cov, k, n));
    // corrupt the magic
    {
        std::FILE* f = std::fopen(fname, "r+b");
        REQUIRE(f);
        std::fputc('X', f);
        std::fclose(f);
    }
    CHECK_THROWS_WITH(load_path(fname), Catch::Matchers::ContainsSubstring("magic"));
    std::remove(fname);
}

TEST_CASE("weighted covariance norm: classic value, tail guard, divergence guard") {
    CovarianceSpec cov(2.0, 512, 1.0);
    const WeightedNorm wn = hs_weighted_norm(cov, 1.0);
    const double basel = PI * PI / 6.0;
    CHECK(wn.value * wn.value == Catch::Approx(basel).epsilon(0.01));
    CHECK(wn.value * wn.value <= basel);
    CHECK(wn.tail_bound < 0.01 * wn.value * wn.value);
    // beta at the edge of summability diverges
    CHECK_THROWS_AS(hs_weighted_norm(cov, 1.5), AssumptionViolation);
    // too-short truncation trips the 1% guard
    CovarianceSpec tiny(1.05, 8, 1.0);
    CHECK_THROWS_AS(hs_weighted_norm(tiny, 1.0), AssumptionViolation);
}
