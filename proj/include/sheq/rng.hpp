#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace sheq {

// Philox4x32-10 counter-based generator. Purely functional: the value at a
// counter/key pair never depends on call order, which is what makes path
// refinement and parallel path sampling reproducible.
struct Philox4x32 {
    static constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    static constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
            ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], std::uint32_t(p1),
                   std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], std::uint32_t(p0)};
            key[0] += W0;
            key[1] += W1;
        }
        return ctr;
    }
};

// splitmix64 step; used to derive per-path seeds from (base_seed, path_id).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_path_seed(std::uint64_t base_seed, std::uint64_t path_id) {
    return splitmix64(base_seed ^ splitmix64(path_id));
}

// A standard normal draw addressed by (seed, stream, mode, index). One Philox
// block yields a Box-Muller pair covering indices {2m, 2m+1}; the pairing is
// part of the frozen keying scheme, so sequential access costs one block per
// two draws while random access stays exact.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint32_t stream, std::uint32_t mode)
        : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, stream_(stream), mode_(mode) {}

    double at(std::uint64_t index) {
        const std::uint64_t pair = index >> 1;
        if (!have_ || pair != cached_pair_) {
            fill(pair);
        }
        return z_[index & 1];
    }

private:
    void fill(std::uint64_t pair) {
        const auto c = Philox4x32::block(
            {stream_, mode_, std::uint32_t(pair), std::uint32_t(pair >> 32)}, key_);
        const double u1 = to_unit(c[0], c[1]);
        const double u2 = to_unit(c[2], c[3]);
        const double r = std::sqrt(-2.0 * std::log(u1));
        z_[0] = r * std::cos(6.283185307179586477 * u2);
        z_[1] = r * std::sin(6.283185307179586477 * u2);
        cached_pair_ = pair;
        have_ = true;
    }

    // 53-bit uniform strictly inside (0,1); the +0.5 offset keeps log() finite.
    static double to_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t v = (std::uint64_t(hi) << 32) | lo;
        return (double(v >> 11) + 0.5) * 0x1p-53;
    }

    std::array<std::uint32_t, 2> key_;
    std::uint32_t stream_, mode_;
    std::uint64_t cached_pair_ = 0;
    bool have_ = false;
    double z_[2] = {0.0, 0.0};
};

// Stream tags. Path sampling and each refinement halving level get disjoint
// streams; auxiliary draws (exact transition sampling) get their own.
enum StreamTag : std::uint32_t {
    STREAM_PATH_BASE = 0x100u,   // + refinement level
    STREAM_EXACT_AUX = 0x8000u,
};

} // namespace sheq
