#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "core.hpp"
#include "covariance.hpp"
#include "rng.hpp"
#include "time_grid.hpp"

namespace sheq {

// A seeded realization of the Q-Wiener increments on a time grid, stored as the
// raw standard-normal matrix xi (mode-major). The increment of mode k over step
// n is sqrt(q_k * tau) * xi(k, n). Refinement level r records how many halvings
// produced this grid from the base grid, which keys the bridge draws.
struct NoisePath {
    std::uint64_t seed = 0;
    TimeGrid grid;
    std::uint64_t K = 0;
    std::uint32_t level = 0;          // refinement halvings applied so far
    std::vector<double> xi;           // K x N, row-major per mode

    double& at(std::uint64_t k, std::uint64_t n) { return xi[(k - 1) * grid.N + n]; }
    double at(std::uint64_t k, std::uint64_t n) const { return xi[(k - 1) * grid.N + n]; }

    // Increment of mode k over step n (0-based step).
    double increment(const CovarianceSpec& spec, std::uint64_t k, std::uint64_t n) const {
        return std::sqrt(spec.q(k) * grid.tau()) * at(k, n);
    }
};

inline NoisePath sample_path(const CovarianceSpec& spec, const TimeGrid& grid, std::uint64_t seed) {
    NoisePath p;
    p.seed = seed;
    p.grid = grid;
    p.K = spec.K;
    p.level = 0;
    p.xi.resize(spec.K * grid.N);
    for (std::uint64_t k = 1; k <= spec.K; ++k) {
        NormalStream ns(seed, STREAM_PATH_BASE + 0, std::uint32_t(k));
        for (std::uint64_t n = 0; n < grid.N; ++n) p.at(k, n) = ns.at(n);
    }
    return p;
}

// Brownian-bridge halving on the normalized draws: with Z an independent
// standard normal keyed by the target level,
//   xi_left = (xi + Z)/sqrt(2),  xi_right = (xi - Z)/sqrt(2).
// Fine increments then sum exactly (to rounding) to the coarse increment, and
// repeated halvings are bit-exact regardless of the factor decomposition.
inline NoisePath refine_path(const NoisePath& path, std::uint64_t factor) {
    if (factor < 2 || (factor & (factor - 1)) != 0)
        throw AssumptionViolation("path refinement factor must be a power of two >= 2");
    NoisePath cur = path;
    for (std::uint64_t f = factor; f > 1; f >>= 1) {
        NoisePath fine;
        fine.seed = cur.seed;
        fine.grid = cur.grid.refined(2);
        fine.K = cur.K;
        fine.level = cur.level + 1;
        fine.xi.resize(cur.K * fine.grid.N);
        const double inv_sqrt2 = 0.70710678118654752440;
        for (std::uint64_t k = 1; k <= cur.K; ++k) {
            NormalStream ns(cur.seed, STREAM_PATH_BASE + fine.level, std::uint32_t(k));
            for (std::uint64_t n = 0; n < cur.grid.N; ++n) {
                const double z = ns.at(n);
                const double x = cur.at(k, n);
                fine.at(k, 2 * n) = (x + z) * inv_sqrt2;
                fine.at(k, 2 * n + 1) = (x - z) * inv_sqrt2;
            }
        }
        cur = std::move(fine);
    }
    return cur;
}

// Binary dump for failure reproduction: 16-byte magic, then K, N, seed as
// u64 little-endian, then the xi matrix row-major as f64.
inline constexpr char NOISE_DUMP_MAGIC[16] = {'S', 'H', 'E', 'Q', '-', 'N', 'O', 'I',
                                              'S', 'E', 'P', 'A', 'T', 'H', '1', '\0'};

inline void dump_path(const NoisePath& p, const std::string& filename) {
    std::FILE* f = std::fopen(filename.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot open noise dump for writing: " + filename);
    std::fwrite(NOISE_DUMP_MAGIC, 1, 16, f);
    const std::uint64_t hdr[3] = {p.K, p.grid.N, p.seed};
    std::fwrite(hdr, sizeof(std::uint64_t), 3, f);
    std::fwrite(p.xi.data(), sizeof(double), p.xi.size(), f);
    std::fclose(f);
}

inline NoisePath load_path(const std::string& filename, double T = 1.0) {
    std::FILE* f = std::fopen(filename.c_str(), "rb");
    if (!f) throw std::runtime_error("cannot open noise dump: " + filename);
    char magic[16];
    if (std::fread(magic, 1, 16, f) != 16 || std::memcmp(magic, NOISE_DUMP_MAGIC, 16) != 0) {
        std::fclose(f);
        throw std::runtime_error("bad noise dump magic in " + filename);
    }
    std::uint64_t hdr[3];
    if (std::fread(hdr, sizeof(std::uint64_t), 3, f) != 3) {
        std::fclose(f);
        throw std::runtime_error("truncated noise dump header in " + filename);
    }
    NoisePath p;
    p.K = hdr[0];
    p.grid = TimeGrid(T, hdr[1]);
    p.seed = hdr[2];
    p.level = 0;
    p.xi.resize(p.K * p.grid.N);
    const std::size_t want = p.xi.size();
    const std::size_t got = std::fread(p.xi.data(), sizeof(double), want, f);
    std::fclose(f);
    if (got != want) throw std::runtime_error("truncated noise dump payload in " + filename);
    return p;
}

} // namespace sheq
