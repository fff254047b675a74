#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "sheq/fem.hpp"
#include "sheq/spectral.hpp"

using namespace sheq;

namespace {
// high-order Gauss pairing of e_k against the hat at node i (oracle)
double gauss_pair(int k, int i, int n) {
    static const double gx[6] = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                 0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
    static const double gw[6] = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                 0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
    const double h = fem::mesh_width(n);
    const int sub = k / 4 + 1;  // keep each Gauss panel well under a wavelength
    const double hs = h / sub;
    double acc = 0.0;
    for (int cell = i - 1; cell <= i; ++cell) {
        const double x0 = cell * h;
        for (int s = 0; s < sub; ++s) {
            const double mid = x0 + (s + 0.5) * hs;
            for (int q = 0; q < 6; ++q) {
                const double x = mid + 0.5 * hs * gx[q];
                const double t = (x - x0) / h;
                const double hat = cell == i - 1 ? t : 1.0 - t;
                acc += 0.5 * hs * gw[q] * hat * std::sqrt(2.0) * std::sin(k * PI * x);
            }
        }
    }
    return acc;
}
}  // namespace

TEST_CASE("mode load factors match Gauss quadrature, including aliased modes") {
    const int n = 15;
    for (int k : {1, 2, 7, 15, 16, 17, 31, 33, 40, 64, 77}) {
        for (int i : {1, 2, 8, 15}) {
            const double direct = gauss_pair(k, i, n);
            // library value: (e_k, phi_i) = load_factor * sin(k pi x_i)
            const double lib = fem::mode_load_factor(k, n) * std::sin(k * PI * i * fem::mesh_width(n));
            CHECK(lib == Catch::Approx(direct).margin(1e-12));
        }
    }
}

TEST_CASE("folded sine synthesis equals the direct double sum") {
    const int n = 31;
    std::mt19937 gen(5);
    std::normal_distribution<double> nd;
    std::vector<double> g(200);
    for (double& v : g) v = nd(gen);
    const std::vector<double> fast = fem::sine_combination_nodal(g, n);
    const double h = fem::mesh_width(n);
    for (int i = 1; i <= n; ++i) {
        double direct = 0.0;
        for (int k = 1; k <= int(g.size()); ++k) direct += g[std::size_t(k - 1)] * std::sin(k * PI * i * h);
        CHECK(fast[std::size_t(i - 1)] == Catch::Approx(direct).margin(1e-10));
    }
}

TEST_CASE("spectral error form agrees with direct quadrature of the difference") {
    const int n = 63;
    std::mt19937 gen(31);
    std::normal_distribution<double> nd;
    std::vector<double> u(std::size_t(n), 0.0);
    for (double& v : u) v = 0.3 * nd(gen);
    std::vector<double> c(12);
    for (double& v : c) v = 0.5 * nd(gen);
    const double form = fem::SpectralErrorForm(n).squared(u, c);
    const double direct = fem::nodal_l2_error(u, n, [&](double x) {
        double s = 0.0;
        for (int k = 1; k <= int(c.size()); ++k)
            s += c[std::size_t(k - 1)] * std::sqrt(2.0) * std::sin(k * PI * x);
        return s;
    });
    CHECK(std::sqrt(form) == Catch::Approx(direct).margin(1e-9));
}

TEST_CASE("hat-to-spectral pairings match per-mode quadrature") {
    const int n = 15;
    std::mt19937 gen(8);
    std::normal_distribution<double> nd;
    std::vector<double> u(std::size_t(n), 0.0);
    for (double& v : u) v = nd(gen);
    const std::vector<double> pr = fem::hat_to_spectral(u, n, 40);
    for (int k = 1; k <= 40; ++k) {
        double direct = 0.0;
        for (int i = 1; i <= n; ++i) direct += u[std::size_t(i - 1)] * gauss_pair(k, i, n);
        CHECK(pr[std::size_t(k - 1)] == Catch::Approx(direct).margin(1e-12));
    }
}

TEST_CASE("projection reproduces members of the mesh space exactly") {
    const int n = 31;
    // a hat function is its own L2 projection
    std::vector<double> c = fem::l2_project(
        [&](double x) {
            const double h = fem::mesh_width(n);
            const double t = x / h - 7.0;
            return t > -1.0 && t < 1.0 ? 1.0 - std::abs(t) : 0.0;
        },
        n);
    for (int i = 1; i <= n; ++i)
        CHECK(c[std::size_t(i - 1)] == Catch::Approx(i == 7 ? 1.0 : 0.0).margin(1e-9));
}

TEST_CASE("elliptic projection converges at second order") {
    // -u'' = pi^2 sin(pi x): solution sin(pi x)
    auto f = [](double x) { return PI * PI * std::sin(PI * x); };
    double e_prev = 0.0;
    for (int n : {31, 63, 127}) {
        std::vector<double> u = fem::poisson_solve(f, n);
        const double e = fem::nodal_l2_error(u, n, [](double x) { return std::sin(PI * x); });
        if (e_prev > 0.0) CHECK(e_prev / e == Catch::Approx(4.0).epsilon(0.06));
        e_prev = e;
    }
}

TEST_CASE("step matrix is mass plus tau stiffness") {
    const int n = 9;
    const double tau = 0.37;
    std::vector<double> x(std::size_t(n), 0.0), a, b, c;
    std::mt19937 gen(2);
    std::normal_distribution<double> nd;
    for (double& v : x) v = nd(gen);
    fem::mass_matrix(n).multiply(x, a);
    fem::stiffness_matrix(n).multiply(x, b);
    fem::step_matrix(n, tau).multiply(x, c);
    for (int i = 0; i < n; ++i)
        CHECK(c[std::size_t(i)] == Catch::Approx(a[std::size_t(i)] + tau * b[std::size_t(i)]).margin(1e-13));
}
