#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "../core.hpp"

namespace sheq {

// Hierarchical piecewise-linear wavelet system on (0,1) with homogeneous
// Dirichlet conditions. Conventions (all norms L2(0,1)):
//  - mesh level m: interior nodes i = 1..2^m-1, spacing h = 2^-m; the scaling
//    functions are the nodal hats (value 1 at their node);
//  - level 0 holds three roots: 3/2 times the mesh-2 hats, so ||root||^2 = 3/8;
//  - wavelet level j >= 1 holds 2^{j+1} functions built on mesh j+2 from
//    second-difference masks, scaled by 2^{(j+2)/2}; every ||psi||^2 = 3/8.
// Interior mask has two vanishing moments; the boundary mask is the folded
// second difference (both moments vanish there too, as a pure second
// difference against linear sequences).
inline constexpr double WAVELET_INTERIOR_MASK[5] = {-0.125, -0.25, 0.75, -0.25, -0.125};
inline constexpr double WAVELET_BOUNDARY_MASK[3] = {0.375, -0.75, 0.375};
inline constexpr double ROOT_SCALE = 1.5;
inline constexpr double WAVELET_NORM_SQ = 0.375;  // uniform across the whole system

struct WIndex {
    int j = 0;  // 0 = roots, >= 1 wavelet levels
    int k = 0;  // position, 0-based

    bool operator==(const WIndex&) const = default;
    bool operator<(const WIndex& o) const { return j != o.j ? j < o.j : k < o.k; }
};

inline int level_count(int j) { return j == 0 ? 3 : (2 << j); }

// Mesh the function is piecewise linear with respect to.
inline int mesh_of(int j) { return j == 0 ? 2 : j + 2; }

// Total basis size for levels 0..jmax equals dim of the mesh-(jmax+2) FEM space.
inline int dimension_through_level(int jmax) { return (1 << (jmax + 2)) - 1; }

inline double wavelet_scale(int j) { return std::exp2(0.5 * (j + 2)); }

// Children double the position; the third root has none (interval clipping).
inline std::vector<WIndex> children(const WIndex& a) {
    if (a.j == 0) {
        if (a.k >= 2) return {};
        return {{1, 2 * a.k}, {1, 2 * a.k + 1}};
    }
    return {{a.j + 1, 2 * a.k}, {a.j + 1, 2 * a.k + 1}};
}

inline WIndex parent(const WIndex& a) {
    if (a.j <= 0) throw AssumptionViolation("roots have no parent");
    if (a.j == 1) return {0, a.k / 2};
    return {a.j - 1, a.k / 2};
}

// Nonzero nodal footprint on mesh_of(j): first node and values at consecutive nodes.
struct Footprint {
    int mesh;
    int first_node;
    std::array<double, 5> vals;
    int count;
};

inline Footprint footprint(const WIndex& a) {
    Footprint f{};
    f.mesh = mesh_of(a.j);
    if (a.j == 0) {
        f.first_node = a.k + 1;
        f.vals = {ROOT_SCALE, 0, 0, 0, 0};
        f.count = 1;
        return f;
    }
    const int nf = (1 << f.mesh) - 1;
    const int last = level_count(a.j) - 1;
    const double s = wavelet_scale(a.j);
    if (a.k == 0) {
        f.first_node = 1;
        f.vals = {s * WAVELET_BOUNDARY_MASK[0], s * WAVELET_BOUNDARY_MASK[1],
                  s * WAVELET_BOUNDARY_MASK[2], 0, 0};
        f.count = 3;
    } else if (a.k == last) {
        f.first_node = nf - 2;
        f.vals = {s * WAVELET_BOUNDARY_MASK[2], s * WAVELET_BOUNDARY_MASK[1],
                  s * WAVELET_BOUNDARY_MASK[0], 0, 0};
        f.count = 3;
    } else {
        f.first_node = 2 * a.k - 1;
        for (int i = 0; i < 5; ++i) f.vals[i] = s * WAVELET_INTERIOR_MASK[i];
        f.count = 5;
    }
    return f;
}

// Support interval [a,b] in physical coordinates.
inline std::pair<double, double> support(const WIndex& a) {
    const Footprint f = footprint(a);
    const double h = std::exp2(-f.mesh);
    return {(f.first_node - 1) * h, (f.first_node + f.count) * h};
}

// Point evaluation; exact at dyadic points of any mesh refining mesh_of(a).
inline double eval_wavelet(const WIndex& a, double x) {
    const Footprint f = footprint(a);
    const double scaled = x * std::exp2(double(f.mesh));  // node coordinate
    const int cell = int(std::floor(scaled));
    const double t = scaled - cell;
    auto node_val = [&](int node) -> double {
        const int nf = (1 << f.mesh) - 1;
        if (node < 1 || node > nf) return 0.0;
        const int off = node - f.first_node;
        if (off < 0 || off >= f.count) return 0.0;
        return f.vals[off];
    };
    if (scaled <= 0.0 || scaled >= double(1 << f.mesh)) return 0.0;
    return node_val(cell) * (1.0 - t) + node_val(cell + 1) * t;
}

// Exact L2 and H1 pairings. Meshes nest, so on each cell of the finer
// function's mesh both factors are linear and the cell integrals are closed
// forms. The coarser function is evaluated at the finer mesh's nodes, which is
// exact for piecewise linears on nested dyadic meshes.
namespace detail {
struct CellRange {
    int mesh;       // integration mesh (the finer of the two)
    int first_cell; // cells [first_cell, last_cell) of that mesh
    int last_cell;
};

inline CellRange overlap_cells(const WIndex& a, const WIndex& b) {
    const Footprint fa = footprint(a), fb = footprint(b);
    const int m = fa.mesh >= fb.mesh ? fa.mesh : fb.mesh;
    auto cells_of = [&](const Footprint& f) {
        const int scale = 1 << (m - f.mesh);
        return std::pair<int, int>{(f.first_node - 1) * scale, (f.first_node + f.count) * scale};
    };
    auto [a0, a1] = cells_of(fa);
    auto [b0, b1] = cells_of(fb);
    CellRange r;
    r.mesh = m;
    r.first_cell = a0 > b0 ? a0 : b0;
    r.last_cell = a1 < b1 ? a1 : b1;
    return r;
}
} // namespace detail

inline double mass_entry(const WIndex& a, const WIndex& b) {
    const auto r = detail::overlap_cells(a, b);
    if (r.first_cell >= r.last_cell) return 0.0;
    const double h = std::exp2(-r.mesh);
    double sum = 0.0;
    for (int c = r.first_cell; c < r.last_cell; ++c) {
        const double x0 = c * h, x1 = (c + 1) * h;
        const double ua = eval_wavelet(a, x0), ub = eval_wavelet(a, x1);
        const double va = eval_wavelet(b, x0), vb = eval_wavelet(b, x1);
        sum += h / 6.0 * (2.0 * ua * va + 2.0 * ub * vb + ua * vb + ub * va);
    }
    return sum;
}

inline double stiff_entry(const WIndex& a, const WIndex& b) {
    const auto r = detail::overlap_cells(a, b);
    if (r.first_cell >= r.last_cell) return 0.0;
    const double h = std::exp2(-r.mesh);
    double sum = 0.0;
    for (int c = r.first_cell; c < r.last_cell; ++c) {
        const double x0 = c * h, x1 = (c + 1) * h;
        const double du = eval_wavelet(a, x1) - eval_wavelet(a, x0);
        const double dv = eval_wavelet(b, x1) - eval_wavelet(b, x0);
        sum += du * dv / h;
    }
    return sum;
}

// Closed-form diagonal stiffness: roots 18; boundary wavelets 45*4^j;
// interior wavelets 33*4^j. Used by the preconditioner and cross-checked
// against stiff_entry in the tests.
inline double stiff_diagonal(const WIndex& a) {
    if (a.j == 0) return 18.0;
    const int last = level_count(a.j) - 1;
    const double f = std::exp2(2.0 * a.j);
    return (a.k == 0 || a.k == last) ? 45.0 * f : 33.0 * f;
}

} // namespace sheq
