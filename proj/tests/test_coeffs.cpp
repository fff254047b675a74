#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "sheq/wavelet/coeffs.hpp"

using namespace sheq;

TEST_CASE("map semantics: set, add, erase, norms") {
    WaveletCoeffs v;
    v.set({2, 3}, 1.5);
    v.add({2, 3}, 0.5);
    v.set({0, 0}, -2.0);
    CHECK(v.get({2, 3}) == 2.0);
    CHECK(v.size() == 2);
    CHECK(v.l2_norm_sq() == Catch::Approx(8.0));
    v.erase({2, 3});
    CHECK(!v.contains({2, 3}));
    CHECK(v.get({2, 3}) == 0.0);
}

TEST_CASE("tree closure inserts exactly the missing ancestors") {
    WaveletCoeffs v;
    v.set({3, 5}, 1.0);
    CHECK(!v.is_tree());
    WaveletCoeffs t = smallest_tree(v);
    CHECK(t.is_tree());
    CHECK(t.get({3, 5}) == 1.0);
    CHECK(t.contains({2, 2}));
    CHECK(t.contains({1, 1}));
    CHECK(t.contains({0, 0}));
    CHECK(t.get({2, 2}) == 0.0);
    // nothing else appeared
    CHECK(t.size() == 4);
}

TEST_CASE("coarsening respects the discarded-mass budget and tree structure") {
    std::mt19937 gen(17);
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    WaveletCoeffs v;
    for (int j = 0; j <= 5; ++j)
        for (int k = 0; k < level_count(j); k += 3) v.set({j, k}, ud(gen) * std::exp2(-j));
    v = smallest_tree(v);
    const double tol = 0.2;
    WaveletCoeffs c = coarsen(v, tol, true);
    CHECK(c.is_tree());
    // dropped mass accounted in l2
    double dropped_sq = 0.0;
    v.for_each([&](const WIndex& a, double val) {
        const double d = val - c.get(a);
        dropped_sq += d * d;
    });
    CHECK(std::sqrt(dropped_sq) <= tol + 1e-12);
    CHECK(c.size() <= v.size());
    // zero tolerance only closes the tree
    WaveletCoeffs z = coarsen(v, 0.0, true);
    CHECK(z.size() == v.size());
    v.for_each([&](const WIndex& a, double val) { CHECK(z.get(a) == val); });
}

TEST_CASE("flat coarsening drops the smallest entries first") {
    WaveletCoeffs v;
    v.set({0, 0}, 1.0);
    v.set({1, 0}, 0.1);
    v.set({2, 0}, 0.01);
    WaveletCoeffs c = coarsen(v, 0.05, false);
    CHECK(c.contains({0, 0}));
    CHECK(c.contains({1, 0}));
    CHECK(!c.contains({2, 0}));
}

TEST_CASE("axpy accumulates across disjoint and shared support") {
    WaveletCoeffs a, b;
    a.set({0, 0}, 1.0);
    a.set({1, 1}, 2.0);
    b.set({1, 1}, 3.0);
    b.set({4, 4}, -1.0);
    a.axpy(2.0, b);
    CHECK(a.get({0, 0}) == 1.0);
    CHECK(a.get({1, 1}) == 8.0);
    CHECK(a.get({4, 4}) == -2.0);
}

TEST_CASE("tree-constrained best-N surrogate behaves monotonically") {
    WaveletCoeffs v;
    std::mt19937 gen(9);
    std::uniform_real_distribution<double> ud(0.1, 1.0);
    for (int j = 0; j <= 4; ++j)
        for (int k = 0; k < level_count(j); k += 2) v.set({j, k}, ud(gen) * std::exp2(-1.5 * j));
    v = smallest_tree(v);
    const double e1 = anorm_tree_estimate(v, 0.5, 4);
    const double e2 = anorm_tree_estimate(v, 1.0, 4);
    CHECK(e1 >= 0.0);
    CHECK(e2 >= e1);  // larger exponent weights the tail harder
}
