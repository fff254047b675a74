#pragma once

#include <cstdint>

#include "core.hpp"

namespace sheq {

// Uniform grid t_n = n*T/N. node(N) reproduces T exactly in floating point.
struct TimeGrid {
    double T = 1.0;
    std::uint64_t N = 1;

    TimeGrid() = default;
    TimeGrid(double T_, std::uint64_t N_) : T(T_), N(N_) {
        if (!(T > 0.0) || N == 0) throw AssumptionViolation("time grid needs T > 0 and N >= 1");
    }

    double tau() const { return T / double(N); }
    double node(std::uint64_t n) const { return T * double(n) / double(N); }

    TimeGrid refined(std::uint64_t factor) const { return TimeGrid(T, N * factor); }
};

} // namespace sheq
