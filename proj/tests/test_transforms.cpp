#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sheq/wavelet/transforms.hpp"

using namespace sheq;

TEST_CASE("analysis inverts synthesis to 1e-12 on full random data") {
    std::mt19937 gen(21);
    std::normal_distribution<double> nd;
    for (int jmax : {1, 3, 5, 6}) {
        WaveletCoeffs c;
        for (int j = 0; j <= jmax; ++j)
            for (int k = 0; k < level_count(j); ++k) c.set({j, k}, nd(gen));
        const int mesh = jmax + 2;
        std::vector<double> nodal = ifwt(c, mesh);
        WaveletCoeffs back = fwt(nodal, mesh);
        double worst = 0.0;
        for (int j = 0; j <= jmax; ++j)
            for (int k = 0; k < level_count(j); ++k)
                worst = std::max(worst, std::abs(back.get({j, k}) - c.get({j, k})));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("round trip from the nodal side, including a deeper target mesh") {
    std::mt19937 gen(4);
    std::normal_distribution<double> nd;
    const int mesh = 7;
    std::vector<double> u(std::size_t((1 << mesh) - 1));
    for (double& v : u) v = nd(gen);
    WaveletCoeffs c = fwt(u, mesh);
    std::vector<double> back = ifwt(c, mesh);
    for (std::size_t i = 0; i < u.size(); ++i)
        CHECK(back[i] == Catch::Approx(u[i]).margin(1e-12));
    // synthesizing on a finer mesh reproduces the midpoint interpolant
    std::vector<double> fine = ifwt(c, mesh + 1);
    for (std::size_t i = 0; i < u.size(); ++i)
        CHECK(fine[2 * i + 1] == Catch::Approx(u[i]).margin(1e-12));
}

TEST_CASE("sparse input stays sparse through analysis") {
    WaveletCoeffs c;
    c.set({0, 1}, 1.0);
    c.set({3, 5}, -2.0);
    std::vector<double> nodal = ifwt(c, 7);
    WaveletCoeffs back = fwt(nodal, 7);
    CHECK(back.get({0, 1}) == Catch::Approx(1.0).margin(1e-12));
    CHECK(back.get({3, 5}) == Catch::Approx(-2.0).margin(1e-12));
    double off = 0.0;
    back.for_each([&](const WIndex& a, double v) {
        if (!(a.j == 0 && a.k == 1) && !(a.j == 3 && a.k == 5)) off = std::max(off, std::abs(v));
    });
    CHECK(off < 1e-12);
}

TEST_CASE("coefficients past the target depth are rejected") {
    WaveletCoeffs c;
    c.set({6, 0}, 1.0);
    CHECK_THROWS_AS(ifwt(c, 7), AssumptionViolation);
}
