#pragma once

#include <cmath>
#include <cstring>
#include <map>
#include <vector>

#include <fftw3.h>

namespace sheq {

// Cached DST-I (FFTW RODFT00) plans. RODFT00 of length n computes
//   Y_k = 2 sum_{j=1}^{n} X_j sin(pi j k / (n+1)),  k = 1..n  (1-based view).
// Plans are per-length and reuse a scratch buffer; single-threaded by design.
class DstCache {
public:
    static DstCache& instance() {
        static DstCache c;
        return c;
    }

    // In-place-style transform: out = RODFT00(in), both length n.
    void transform(const double* in, double* out, int n) {
        Entry& e = entry(n);
        std::memcpy(e.buf.data(), in, sizeof(double) * n);
        fftw_execute_r2r(e.plan, e.buf.data(), e.buf.data());
        std::memcpy(out, e.buf.data(), sizeof(double) * n);
    }

    ~DstCache() {
        for (auto& [n, e] : entries_) fftw_destroy_plan(e.plan);
    }

private:
    struct Entry {
        std::vector<double> buf;
        fftw_plan plan;
    };

    Entry& entry(int n) {
        auto it = entries_.find(n);
        if (it == entries_.end()) {
            Entry e;
            e.buf.assign(n, 0.0);
            e.plan = fftw_plan_r2r_1d(n, e.buf.data(), e.buf.data(), FFTW_RODFT00, FFTW_ESTIMATE);
            it = entries_.emplace(n, std::move(e)).first;
        }
        return it->second;
    }

    std::map<int, Entry> entries_;
};

// Nodal values u_i = sum_k c_k sqrt(2) sin(k pi x_i) at x_i = i/(n+1), i=1..n,
// for K <= n sine modes.
inline void spectral_to_nodal(const std::vector<double>& coeffs, std::vector<double>& nodal, int n) {
    std::vector<double> in(n, 0.0);
    const int K = int(coeffs.size());
    for (int k = 0; k < K && k < n; ++k) in[k] = coeffs[k];
    nodal.assign(n, 0.0);
    DstCache::instance().transform(in.data(), nodal.data(), n);
    const double s = std::sqrt(2.0) / 2.0;
    for (double& v : nodal) v *= s;
}

// Inverse: sine coefficients of the trigonometric interpolant through nodal
// values at x_i = i/(n+1); keeps the first K modes.
inline void nodal_to_spectral(const std::vector<double>& nodal, std::vector<double>& coeffs, int K) {
    const int n = int(nodal.size());
    std::vector<double> out(n, 0.0);
    DstCache::instance().transform(nodal.data(), out.data(), n);
    const double s = 1.0 / (std::sqrt(2.0) * double(n + 1));
    coeffs.assign(K, 0.0);
    for (int k = 0; k < K && k < n; ++k) coeffs[k] = out[k] * s;
}

} // namespace sheq
