#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <vector>

#include "basis.hpp"

namespace sheq {

// Sparse wavelet coefficient vector, stored per level with ordered positions
// so support-range queries stay cheap. Optionally tree-structured: every
// non-root index is accompanied by its parent.
class WaveletCoeffs {
public:
    using LevelMap = std::map<int, double>;

    int max_level() const {
        for (int j = int(levels_.size()) - 1; j >= 0; --j)
            if (!levels_[j].empty()) return j;
        return -1;
    }

    bool empty() const {
        for (const auto& m : levels_)
            if (!m.empty()) return false;
        return true;
    }

    std::size_t size() const {
        std::size_t s = 0;
        for (const auto& m : levels_) s += m.size();
        return s;
    }

    double get(const WIndex& a) const {
        if (a.j >= int(levels_.size())) return 0.0;
        auto it = levels_[a.j].find(a.k);
        return it == levels_[a.j].end() ? 0.0 : it->second;
    }

    bool contains(const WIndex& a) const {
        return a.j < int(levels_.size()) && levels_[a.j].count(a.k) > 0;
    }

    void set(const WIndex& a, double v) {
        if (a.j >= int(levels_.size())) levels_.resize(a.j + 1);
        levels_[a.j][a.k] = v;
    }

    void add(const WIndex& a, double v) {
        if (a.j >= int(levels_.size())) levels_.resize(a.j + 1);
        levels_[a.j][a.k] += v;
    }

    void erase(const WIndex& a) {
        if (a.j < int(levels_.size())) levels_[a.j].erase(a.k);
    }

    const LevelMap& level(int j) const {
        static const LevelMap empty_map;
        return j < int(levels_.size()) ? levels_[j] : empty_map;
    }

    int level_count_stored() const { return int(levels_.size()); }

    double l2_norm_sq() const {
        double s = 0.0;
        for (const auto& m : levels_)
            for (const auto& [k, v] : m) s += v * v;
        return s;
    }
    double l2_norm() const { return std::sqrt(l2_norm_sq()); }

    template <class F>
    void for_each(F&& f) const {
        for (int j = 0; j < int(levels_.size()); ++j)
            for (const auto& [k, v] : levels_[j]) f(WIndex{j, k}, v);
    }

    template <class F>
    void for_each_mut(F&& f) {
        for (int j = 0; j < int(levels_.size()); ++j)
            for (auto& [k, v] : levels_[j]) f(WIndex{j, k}, v);
    }

    // v <- v + alpha * other
    void axpy(double alpha, const WaveletCoeffs& other) {
        other.for_each([&](const WIndex& a, double val) { add(a, alpha * val); });
    }

    // True when every stored index has its parent stored (root levels always do).
    bool is_tree() const {
        for (int j = 1; j < int(levels_.size()); ++j)
            for (const auto& [k, v] : levels_[j])
                if (!contains(parent(WIndex{j, k}))) return false;
        return true;
    }

    // Add all missing ancestors (with zero coefficients) of stored indices.
    void close_to_tree() {
        for (int j = int(levels_.size()) - 1; j >= 1; --j) {
            for (const auto& [k, v] : levels_[j]) {
                WIndex p = parent(WIndex{j, k});
                if (!contains(p)) set(p, 0.0);
            }
        }
    }

private:
    std::vector<LevelMap> levels_;
};

// Largest-tree coarsening: greedily removes current leaves in ascending |c|^2
// order while the removed energy stays within tol^2. tol = 0 keeps everything;
// tol >= ||v|| empties the vector. In non-tree mode plain thresholding (same
// greedy ordering, ignoring leaf constraints) is used. Structural zeros are
// legal tree fillers, so no drop tolerance is applied in tree mode.
// Smallest tree-structured superset: every stored index gains its ancestors
// (inserted with value zero when absent).
inline WaveletCoeffs smallest_tree(const WaveletCoeffs& v) {
    WaveletCoeffs out = v;
    out.close_to_tree();
    return out;
}

inline WaveletCoeffs coarsen(const WaveletCoeffs& v, double tol, bool tree_mode = true) {
    WaveletCoeffs out = v;
    if (tree_mode) out.close_to_tree();
    const double budget = tol * tol;
    if (budget <= 0.0) return out;

    struct Item {
        double energy;
        WIndex idx;
        bool operator>(const Item& o) const { return energy > o.energy; }
    };
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;

    auto child_count = [&](const WIndex& a) {
        int c = 0;
        for (const WIndex& ch : children(a))
            if (out.contains(ch)) ++c;
        return c;
    };

    std::map<std::pair<int, int>, int> kids;
    out.for_each([&](const WIndex& a, double) {
        kids[{a.j, a.k}] = tree_mode ? child_count(a) : 0;
    });
    out.for_each([&](const WIndex& a, double val) {
        if (kids[{a.j, a.k}] == 0) heap.push({val * val, a});
    });

    double removed = 0.0;
    while (!heap.empty()) {
        Item it = heap.top();
        heap.pop();
        if (!out.contains(it.idx)) continue;
        const double cur = out.get(it.idx);
        if (cur * cur != it.energy) continue;  // stale heap entry
        if (tree_mode && kids[{it.idx.j, it.idx.k}] > 0) continue;
        if (removed + it.energy > budget) break;
        removed += it.energy;
        out.erase(it.idx);
        if (tree_mode && it.idx.j >= 1) {
            WIndex p = parent(it.idx);
            if (out.contains(p)) {
                int& c = kids[{p.j, p.k}];
                if (--c == 0) {
                    const double pv = out.get(p);
                    heap.push({pv * pv, p});
                }
            }
        }
    }
    return out;
}

// Greedy N-term tree approximation ladder: sigma(m) = || v - best m-node tree ||
// under the same greedy ordering as coarsen. Returns max_{N=1..N0} N^s sigma(N-1),
// the empirical approximation-class quasi-norm at rate s.
inline double anorm_tree_estimate(const WaveletCoeffs& v, double s, int N0) {
    WaveletCoeffs work = v;
    work.close_to_tree();
    const std::size_t total = work.size();

    // Record removal energies by running the coarsen ordering to exhaustion.
    std::vector<double> removal;  // energy of each removed node, in removal order
    {
        struct Item {
            double energy;
            WIndex idx;
            bool operator>(const Item& o) const { return energy > o.energy; }
        };
        std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
        std::map<std::pair<int, int>, int> kids;
        work.for_each([&](const WIndex& a, double) {
            int c = 0;
            for (const WIndex& ch : children(a))
                if (work.contains(ch)) ++c;
            kids[{a.j, a.k}] = c;
        });
        work.for_each([&](const WIndex& a, double val) {
            if (kids[{a.j, a.k}] == 0) heap.push({val * val, a});
        });
        while (!heap.empty()) {
            Item it = heap.top();
            heap.pop();
            if (!work.contains(it.idx)) continue;
            const double cur = work.get(it.idx);
            if (cur * cur != it.energy) continue;
            if (kids[{it.idx.j, it.idx.k}] > 0) continue;
            removal.push_back(it.energy);
            work.erase(it.idx);
            if (it.idx.j >= 1) {
                WIndex p = parent(it.idx);
                if (work.contains(p)) {
                    int& c = kids[{p.j, p.k}];
                    if (--c == 0) heap.push({work.get(p) * work.get(p), p});
                }
            }
        }
    }

    // Keeping m nodes means the first (total - m) removals happened, so
    // sigma^2(m) is a prefix sum of removal energies.
    std::vector<double> prefix(removal.size() + 1, 0.0);
    for (std::size_t i = 0; i < removal.size(); ++i) prefix[i + 1] = prefix[i] + removal[i];

    double best = 0.0;
    for (int N = 1; N <= N0; ++N) {
        const std::size_t keep = std::size_t(N - 1);
        const double sigma2 = keep >= total ? 0.0 : prefix[total - keep];
        best = std::max(best, std::pow(double(N), s) * std::sqrt(sigma2));
    }
    return best;
}

} // namespace sheq
