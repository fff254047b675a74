#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sheq {

// Library version, stamped into report metadata.
inline constexpr char SHEQ_VERSION[] = "1.0.0";

// Model-assumption failures (divergent covariance choices, inconsistent grids, ...).
struct AssumptionViolation : std::runtime_error {
    explicit AssumptionViolation(const std::string& what) : std::runtime_error(what) {}
};

// Iterative solver gave up; carries the last certified residual bound.
struct NonconvergenceError : std::runtime_error {
    double residual;
    NonconvergenceError(const std::string& what, double res)
        : std::runtime_error(what + " (residual " + std::to_string(res) + ")"), residual(res) {}
};

struct RefinementExhausted : std::runtime_error {
    explicit RefinementExhausted(const std::string& what) : std::runtime_error(what) {}
};

// Cheap operation counter threaded through the adaptive solver so studies can
// report work per step. Counts are approximate flop-scale units, not cycles.
struct OpCounter {
    std::uint64_t ops = 0;
    void add(std::uint64_t n) { ops += n; }
};

} // namespace sheq
