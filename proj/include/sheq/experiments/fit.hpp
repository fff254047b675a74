#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "../core.hpp"

namespace sheq::experiments {

// Least-squares decay rate of log2(error) against a refinement level.  The
// sign is flipped so that an error halving per level fits slope +1.  The 95%
// band comes from the residual variance of the fit (Student t on n-2 dof), so
// a perfect geometric sequence collapses to a zero-width interval.
struct RateFit {
    double slope = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double intercept_log2 = 0.0;  // fitted log2(error) at level 0
    std::size_t points_used = 0;
    std::vector<char> used;  // per input point: 1 if it entered the fit
};

inline double student_t_975(std::size_t dof) {
    static const double q[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447,
                               2.365,  2.306, 2.262, 2.228, 2.201, 2.179};
    if (dof == 0) throw AssumptionViolation("rate fit has no residual degrees of freedom");
    return dof <= 12 ? q[dof - 1] : 1.96;
}

// Fits log2(errors[i]) ~ a - slope * levels[i].  Points whose Monte Carlo
// standard error exceeds 20% of the error are noise-dominated and excluded,
// as are non-positive errors; pass an empty stderr list to keep every
// positive point.  Fewer than three usable points is an error, not a fit.
inline RateFit fit_rate(const std::vector<double>& errors, const std::vector<double>& levels,
                        const std::vector<double>& stderrs = {}) {
    if (errors.size() != levels.size())
        throw AssumptionViolation("rate fit needs one level per error value");
    if (!stderrs.empty() && stderrs.size() != errors.size())
        throw AssumptionViolation("rate fit stderr list has the wrong length");

    RateFit out;
    out.used.assign(errors.size(), 0);
    std::vector<double> x, y;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!(errors[i] > 0.0)) continue;
        if (!stderrs.empty() && stderrs[i] > 0.2 * errors[i]) continue;
        out.used[i] = 1;
        x.push_back(levels[i]);
        y.push_back(std::log2(errors[i]));
    }
    const std::size_t n = x.size();
    if (n < 3) throw AssumptionViolation("rate fit needs at least three usable points");

    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0.0) throw AssumptionViolation("rate fit needs at least two distinct levels");

    const double raw = sxy / sxx;  // d log2(err) / d level, negative for decay
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = y[i] - (my + raw * (x[i] - mx));
        rss += r * r;
    }
    const double se = std::sqrt(std::max(rss, 0.0) / double(n - 2) / sxx);
    const double t = student_t_975(n - 2);

    out.slope = -raw;
    out.ci_lo = out.slope - t * se;
    out.ci_hi = out.slope + t * se;
    out.intercept_log2 = my - raw * mx;
    out.points_used = n;
    return out;
}

}  // namespace sheq::experiments
