#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <random>

#include "sheq/wavelet/banded.hpp"

using namespace sheq;

TEST_CASE("banded LU reproduces a dense solve") {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    for (int n : {5, 23, 64}) {
        const int kl = 2, ku = 2;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
        BandedLU lu(n, kl, ku);
        for (int i = 0; i < n; ++i)
            for (int j = std::max(0, i - kl); j <= std::min(n - 1, i + ku); ++j) {
                double v = ud(gen);
                if (i == j) v += 4.0;  // keep it comfortably invertible
                A(i, j) = v;
                lu.at(i, j) = v;
            }
        lu.factor();
        Eigen::VectorXd xref = Eigen::VectorXd::NullaryExpr(n, [&](int) { return ud(gen); });
        Eigen::VectorXd b = A * xref;
        std::vector<double> bv(b.data(), b.data() + n);
        lu.solve(bv);
        for (int i = 0; i < n; ++i) CHECK(bv[std::size_t(i)] == Catch::Approx(xref(i)).margin(1e-10));
    }
}

TEST_CASE("banded LU survives a pivot-demanding matrix") {
    // leading entry tiny: partial pivoting must kick in
    BandedLU lu(3, 1, 1);
    lu.at(0, 0) = 1e-18;
    lu.at(0, 1) = 1.0;
    lu.at(1, 0) = 1.0;
    lu.at(1, 1) = 1.0;
    lu.at(1, 2) = 1.0;
    lu.at(2, 1) = 1.0;
    lu.at(2, 2) = 2.0;
    lu.factor();
    // A x = b with x = (1, 1e-18... ) solve for b = (1, 3, 3): x = A^{-1} b
    std::vector<double> b = {1.0, 3.0, 3.0};
    lu.solve(b);
    // residual check against the original entries
    const double r0 = 1e-18 * b[0] + b[1] - 1.0;
    const double r1 = b[0] + b[1] + b[2] - 3.0;
    const double r2 = b[1] + 2.0 * b[2] - 3.0;
    CHECK(std::abs(r0) < 1e-12);
    CHECK(std::abs(r1) < 1e-12);
    CHECK(std::abs(r2) < 1e-12);
}

TEST_CASE("tridiagonal solve and multiply invert each other") {
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> ud(0.1, 1.0);
    const int n = 50;
    std::vector<double> d(n), o(n - 1);
    for (double& v : d) v = 3.0 + ud(gen);
    for (double& v : o) v = -ud(gen);
    Tridiag t(d, o);
    std::vector<double> x(n), y, z;
    for (double& v : x) v = ud(gen);
    t.multiply(x, y);
    z = y;
    t.solve(z);
    for (int i = 0; i < n; ++i) CHECK(z[std::size_t(i)] == Catch::Approx(x[std::size_t(i)]).margin(1e-12));
}
