#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sheq/spectral.hpp"

using namespace sheq;

TEST_CASE("resolvent damping partial sums hit the closed form and stay below 1/(2 lambda)") {
    for (double lambda : {1.0, 10.0, 100.0}) {
        for (double tau : {0.1, 0.01}) {
            const double closed = euler_damping_closed_form(tau, lambda);
            CHECK(closed <= 0.5 / lambda + 1e-15);
            // monotone partial sums never cross the closed form
            double prev = 0.0;
            for (std::uint64_t n : {10ull, 1000ull, 100000ull}) {
                const double s = euler_damping_partial_sum(tau, lambda, n);
                CHECK(s >= prev);
                CHECK(s <= closed + 1e-15);
                CHECK(s <= 0.5 / lambda + 1e-15);
                prev = s;
            }
            CHECK(std::abs(prev - closed) <= 1e-10);
        }
    }
}

TEST_CASE("one-mode exact transition: law of total variance and small-argument branch") {
    for (double tau : {0.5, 0.01}) {
        for (double lambda : {1.0, 40.0, 2500.0}) {
            ExactModeStep st(tau, lambda);
            const double var1 = -std::expm1(-2.0 * lambda * tau) / (2.0 * lambda);
            const double total = st.cond_std * st.cond_std + st.cond_gain * st.cond_gain * tau;
            CHECK(total == Catch::Approx(var1).epsilon(1e-9));
            CHECK(st.decay == Catch::Approx(std::exp(-lambda * tau)));
        }
    }
    // series branch continuous against the direct formula where both are stable
    for (double a : {5e-3, 9.9e-3, 1.01e-2, 2e-2}) {
        const double tau = 1.0, lambda = a;
        ExactModeStep st(tau, lambda);
        const long double cov = -std::expm1l(-(long double)a) / (long double)lambda;
        const long double var1 = -std::expm1l(-2.0L * a) / (2.0L * lambda);
        const long double s2 = var1 - cov * cov / (long double)tau;
        CHECK(st.cond_std * st.cond_std == Catch::Approx(double(s2)).epsilon(1e-6));
    }
}

TEST_CASE("conditional mean matches the coupling gain") {
    ExactModeStep st(0.1, 9.8696);
    const double w = 0.7, dB = 0.33, q = 2.0;
    CHECK(st.advance(w, dB, 0.0, q) ==
          Catch::Approx(st.decay * w + std::sqrt(q) * st.cond_gain * dB));
}

TEST_CASE("cumulative smoothing of the scheme stays within the stationary budget") {
    // sum_n tau |A^{1/2} r^n(tau A) v|^2 <= 0.5 |v|^2, with 10% headroom
    std::mt19937 gen(7);
    std::normal_distribution<double> nd;
    for (double tau : {0.1, 0.01}) {
        SpectralField v(64);
        for (double& c : v.c) c = nd(gen);
        const double v2 = v.l2_norm() * v.l2_norm();
        double acc = 0.0;
        for (std::size_t k = 1; k <= v.modes(); ++k) {
            const double lam = eigenvalue(k);
            acc += lam * v.c[k - 1] * v.c[k - 1] * euler_damping_partial_sum(tau, lam, 2000);
        }
        CHECK(acc <= 0.55 * v2);
    }
}

TEST_CASE("eigenfunctions: values, domain guard, orthonormality by quadrature") {
    CHECK(eval_eigenfunction(1, 0.5) == Catch::Approx(std::sqrt(2.0)));
    CHECK(eval_eigenfunction(2, 0.25) == Catch::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(eval_eigenfunction(1, -0.1), AssumptionViolation);
    CHECK_THROWS_AS(eval_eigenfunction(1, 1.1), AssumptionViolation);
    CHECK_THROWS_AS(eval_eigenfunction(0, 0.5), AssumptionViolation);
    // composite Simpson, fine enough for near-machine accuracy on these modes
    const int n = 4000;
    const double h = 1.0 / n;
    for (int k = 1; k <= 3; ++k)
        for (int l = k; l <= 3; ++l) {
            double s = 0.0;
            for (int i = 0; i <= n; ++i) {
                const double wgt = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
                s += wgt * eval_eigenfunction(k, i * h) * eval_eigenfunction(l, i * h);
            }
            s *= h / 3.0;
            CHECK(s == Catch::Approx(k == l ? 1.0 : 0.0).margin(1e-10));
        }
}

TEST_CASE("fractional powers and the Sobolev-scale norm agree") {
    SpectralField f(8);
    for (std::size_t k = 0; k < 8; ++k) f.c[k] = 1.0 / double(k + 1);
    double direct = 0.0;
    for (std::size_t k = 1; k <= 8; ++k)
        direct += eigenvalue(k) * f.c[k - 1] * f.c[k - 1];
    CHECK(hdot_norm(f, 1.0) == Catch::Approx(std::sqrt(direct)));
    SpectralField g = f;
    fractional_apply(g, 0.5);  // A^{1/2} f has plain L2 norm |f|_{H^1-dot}
    CHECK(g.l2_norm() == Catch::Approx(hdot_norm(f, 1.0)));
    fractional_apply(g, -0.5);
    for (std::size_t k = 0; k < 8; ++k) CHECK(g.c[k] == Catch::Approx(f.c[k]));
}

TEST_CASE("n-fold resolvent equals repeated single application") {
    SpectralField f(5);
    for (std::size_t k = 0; k < 5; ++k) f.c[k] = double(k) + 0.5;
    SpectralField a = f, b = f;
    euler_rational_apply(a, 0.05, 3);
    for (int i = 0; i < 3; ++i) euler_rational_apply(b, 0.05, 1);
    for (std::size_t k = 0; k < 5; ++k) CHECK(a.c[k] == Catch::Approx(b.c[k]).epsilon(1e-14));
}
