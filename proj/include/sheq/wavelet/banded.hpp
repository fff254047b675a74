#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "../core.hpp"

namespace sheq {

// Compact banded LU with partial pivoting (LAPACK-style storage): a matrix
// with kl sub- and ku superdiagonals is factored in place in a band array of
// 2*kl+ku+1 rows; row kl+ku holds the main diagonal before factorization.
class BandedLU {
public:
    BandedLU(int n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), lda_(2 * kl + ku + 1), ab_(std::size_t(lda_) * n, 0.0),
          piv_(n, 0) {}

    // Assign A(i,j) before factorization; |i-j| must be within the band.
    double& at(int i, int j) { return ab_[band_index(i, j)]; }

    void factor() {
        const int kv = kl_ + ku_;  // rows above the diagonal in storage
        for (int jcol = 0; jcol < n_; ++jcol) {
            // pivot search in column jcol, rows jcol..min(jcol+kl, n-1)
            const int lm = std::min(kl_, n_ - 1 - jcol);
            int ip = 0;
            double amax = std::fabs(ab_[idx(kv, jcol)]);
            for (int i = 1; i <= lm; ++i) {
                const double v = std::fabs(ab_[idx(kv + i, jcol)]);
                if (v > amax) {
                    amax = v;
                    ip = i;
                }
            }
            piv_[jcol] = jcol + ip;
            if (amax == 0.0) throw AssumptionViolation("singular banded matrix");
            const int ju = std::min(jcol + ku_ + kl_, n_ - 1);  // last affected column
            if (ip != 0) {
                for (int j = jcol; j <= ju; ++j)
                    std::swap(ab_[idx(kv + jcol - j, j)], ab_[idx(kv + jcol - j + ip, j)]);
            }
            const double pivot = ab_[idx(kv, jcol)];
            for (int i = 1; i <= lm; ++i) {
                const double mult = ab_[idx(kv + i, jcol)] / pivot;
                ab_[idx(kv + i, jcol)] = mult;
                for (int j = jcol + 1; j <= ju; ++j)
                    ab_[idx(kv + jcol - j + i, j)] -= mult * ab_[idx(kv + jcol - j, j)];
            }
        }
        factored_ = true;
    }

    void solve(std::vector<double>& b) const {
        if (!factored_) throw AssumptionViolation("solve before factor");
        const int kv = kl_ + ku_;
        for (int j = 0; j < n_; ++j) {
            if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
            const int lm = std::min(kl_, n_ - 1 - j);
            for (int i = 1; i <= lm; ++i) b[j + i] -= ab_[idx(kv + i, j)] * b[j];
        }
        for (int j = n_ - 1; j >= 0; --j) {
            b[j] /= ab_[idx(kv, j)];
            const int top = std::max(0, j - kv);
            for (int i = top; i < j; ++i) b[i] -= ab_[idx(kv + i - j, j)] * b[j];
        }
    }

    int size() const { return n_; }

private:
    std::size_t band_index(int i, int j) const {
        if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_)
            throw AssumptionViolation("banded index outside band");
        return idx(kl_ + ku_ + i - j, j);
    }
    std::size_t idx(int r, int j) const { return std::size_t(j) * lda_ + r; }

    int n_, kl_, ku_, lda_;
    std::vector<double> ab_;
    std::vector<int> piv_;
    bool factored_ = false;
};

// Symmetric positive-definite tridiagonal solve (Thomas); no pivoting needed.
class Tridiag {
public:
    Tridiag() = default;
    // diag d_0..d_{n-1}, off-diagonal e_0..e_{n-2}
    Tridiag(std::vector<double> diag, std::vector<double> off)
        : d_(std::move(diag)), e_(std::move(off)) {
        const int n = int(d_.size());
        c_.assign(n, 0.0);
        w_.assign(n, 0.0);
        c_[0] = d_[0];
        for (int i = 1; i < n; ++i) {
            w_[i] = e_[i - 1] / c_[i - 1];
            c_[i] = d_[i] - w_[i] * e_[i - 1];
        }
    }

    void solve(std::vector<double>& b) const {
        const int n = int(d_.size());
        for (int i = 1; i < n; ++i) b[i] -= w_[i] * b[i - 1];
        b[n - 1] /= c_[n - 1];
        for (int i = n - 2; i >= 0; --i) b[i] = (b[i] - e_[i] * b[i + 1]) / c_[i];
    }

    void multiply(const std::vector<double>& x, std::vector<double>& y) const {
        const int n = int(d_.size());
        y.assign(n, 0.0);
        for (int i = 0; i < n; ++i) {
            y[i] = d_[i] * x[i];
            if (i > 0) y[i] += e_[i - 1] * x[i - 1];
            if (i + 1 < n) y[i] += e_[i] * x[i + 1];
        }
    }

private:
    std::vector<double> d_, e_, c_, w_;
};

} // namespace sheq
