#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "core.hpp"
#include "covariance.hpp"
#include "fft.hpp"
#include "wavelet/banded.hpp"

namespace sheq::fem {

// Continuous piecewise-linear elements on the uniform mesh x_i = i*h,
// i = 1..n, h = 1/(n+1), zero boundary values.

inline double mesh_width(int n) { return 1.0 / (n + 1); }

inline Tridiag mass_matrix(int n) {
    const double h = mesh_width(n);
    return Tridiag(std::vector<double>(n, 4.0 * h / 6.0), std::vector<double>(n - 1, h / 6.0));
}

inline Tridiag stiffness_matrix(int n, double kappa = 1.0) {
    const double h = mesh_width(n);
    return Tridiag(std::vector<double>(n, 2.0 * kappa / h), std::vector<double>(n - 1, -kappa / h));
}

// M + tau*kappa*S, the implicit-step matrix.
inline Tridiag step_matrix(int n, double tau, double kappa = 1.0) {
    const double h = mesh_width(n);
    return Tridiag(std::vector<double>(n, 4.0 * h / 6.0 + tau * 2.0 * kappa / h),
                   std::vector<double>(n - 1, h / 6.0 - tau * kappa / h));
}

// (e_k, phi_i) = load_factor(k,n) * sin(k*pi*x_i): integrating the sine mode
// against a hat gives amplitude 2*sqrt(2)*(1-cos(k*pi*h)) / ((k*pi)^2 * h).
inline double mode_load_factor(int k, int n) {
    const double h = mesh_width(n);
    const double kp = k * PI;
    return 2.0 * std::sqrt(2.0) * (1.0 - std::cos(kp * h)) / (kp * kp * h);
}

// s_i = sum_{k=1..K} g_k sin(k*pi*x_i) for K >> n, in O(K + n log n):
// sin(k*pi*i*h) has period 2(n+1) in k and is odd under k -> 2(n+1)-k, so the
// weights fold into n signed bins and one DST finishes the job.
inline std::vector<double> sine_combination_nodal(const std::vector<double>& g, int n) {
    const int period = 2 * (n + 1);
    std::vector<double> bins(n, 0.0);
    for (int k = 1; k <= int(g.size()); ++k) {
        const int r = k % period;
        if (r == 0 || r == n + 1) continue;
        if (r <= n)
            bins[r - 1] += g[k - 1];
        else
            bins[period - r - 1] -= g[k - 1];
    }
    std::vector<double> out(n);
    DstCache::instance().transform(bins.data(), out.data(), n);  // 2 sum bins_r sin(r pi x_i)
    for (double& v : out) v *= 0.5;
    return out;
}

// Load vector of f = sum a_k e_k (spectral coefficients over sqrt(2)-normalized
// sine modes).
inline std::vector<double> spectral_load(const std::vector<double>& a, int n) {
    std::vector<double> g(a.size());
    for (int k = 1; k <= int(a.size()); ++k) g[k - 1] = a[k - 1] * mode_load_factor(k, n);
    return sine_combination_nodal(g, n);
}

// Quadratic form for || u_h - sum c_k e_k ||_{L2}^2 with u_h nodal on the
// mesh: u'Mu - 2 u'b(c) + |c|^2. Exact (the integrals are closed-form); cost
// O(K + n log n) per evaluation.
class SpectralErrorForm {
public:
    explicit SpectralErrorForm(int n) : n_(n), mass_(mass_matrix(n)) {}

    double squared(const std::vector<double>& u, const std::vector<double>& c) const {
        std::vector<double> mu;
        mass_.multiply(u, mu);
        double quad = 0.0, cross = 0.0, pure = 0.0;
        for (int i = 0; i < n_; ++i) quad += u[i] * mu[i];
        const std::vector<double> b = spectral_load(c, n_);
        for (int i = 0; i < n_; ++i) cross += u[i] * b[i];
        for (double ck : c) pure += ck * ck;
        return quad - 2.0 * cross + pure;
    }

private:
    int n_;
    Tridiag mass_;
};

// Galerkin load of a generic f: 3-point Gauss on each half-support interval.
inline std::vector<double> assemble_load(const std::function<double(double)>& f, int n) {
    static const double gx[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double gw[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    const double h = mesh_width(n);
    std::vector<double> b(n, 0.0);
    for (int cell = 0; cell <= n; ++cell) {
        const double x0 = cell * h, mid = x0 + 0.5 * h;
        for (int q = 0; q < 3; ++q) {
            const double x = mid + 0.5 * h * gx[q];
            const double w = 0.5 * h * gw[q] * f(x);
            const double t = (x - x0) / h;
            if (cell >= 1) b[cell - 1] += w * (1.0 - t);
            if (cell + 1 <= n) b[cell] += w * t;
        }
    }
    return b;
}

// || u_h - f ||_{L2} for a callable reference, 6-point Gauss per cell.
inline double nodal_l2_error(const std::vector<double>& u, int n,
                             const std::function<double(double)>& f) {
    static const double gx[6] = {-0.9324695142031521, -0.6612093864662645, -0.2386191860831969,
                                 0.2386191860831969,  0.6612093864662645,  0.9324695142031521};
    static const double gw[6] = {0.1713244923791704, 0.3607615730481386, 0.4679139345726910,
                                 0.4679139345726910, 0.3607615730481386, 0.1713244923791704};
    const double h = mesh_width(n);
    double acc = 0.0;
    for (int cell = 0; cell <= n; ++cell) {
        const double x0 = cell * h, mid = x0 + 0.5 * h;
        const double ul = cell >= 1 ? u[cell - 1] : 0.0;
        const double ur = cell + 1 <= n ? u[cell] : 0.0;
        for (int q = 0; q < 6; ++q) {
            const double x = mid + 0.5 * h * gx[q];
            const double t = (x - x0) / h;
            const double d = ul * (1.0 - t) + ur * t - f(x);
            acc += 0.5 * h * gw[q] * d * d;
        }
    }
    return std::sqrt(acc);
}

// Galerkin solution of -kappa u'' = f with zero boundary values.
inline std::vector<double> poisson_solve(const std::function<double(double)>& f, int n,
                                         double kappa = 1.0) {
    std::vector<double> b = assemble_load(f, n);
    stiffness_matrix(n, kappa).solve(b);
    return b;
}

// Exact pairings (u_h, e_k), k = 1..K, of a nodal function against the sine
// modes. One DST gives sum_i u_i sin(r pi x_i) for r <= n; modes beyond fold
// back by the same aliasing rule as the load assembly.
inline std::vector<double> hat_to_spectral(const std::vector<double>& u, int n, int K) {
    std::vector<double> y(n);
    DstCache::instance().transform(u.data(), y.data(), n);  // y_r = 2 sum u_i sin(r pi x_i)
    const int period = 2 * (n + 1);
    std::vector<double> out(K, 0.0);
    for (int k = 1; k <= K; ++k) {
        const int r = k % period;
        if (r == 0 || r == n + 1) continue;
        const double s = r <= n ? 0.5 * y[r - 1] : -0.5 * y[period - r - 1];
        out[k - 1] = mode_load_factor(k, n) * s;
    }
    return out;
}

// L2 projection of a spectral field onto the mesh space: solve M c = b.
inline std::vector<double> l2_project(const std::vector<double>& a, int n) {
    std::vector<double> b = spectral_load(a, n);
    mass_matrix(n).solve(b);
    return b;
}

inline std::vector<double> l2_project(const std::function<double(double)>& f, int n) {
    std::vector<double> b = assemble_load(f, n);
    mass_matrix(n).solve(b);
    return b;
}

// Piecewise-linear evaluation of a nodal function at arbitrary x in [0,1].
inline double nodal_interp(const std::vector<double>& u, int n, double x) {
    const double h = mesh_width(n);
    const double s = x / h;
    int cell = int(s);
    if (cell < 0) cell = 0;
    if (cell > n) cell = n;
    const double t = s - cell;
    const double ul = cell >= 1 ? u[cell - 1] : 0.0;
    const double ur = cell + 1 <= n ? u[cell] : 0.0;
    return ul * (1.0 - t) + ur * t;
}

} // namespace sheq::fem
