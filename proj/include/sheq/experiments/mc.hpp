#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "../core.hpp"

namespace sheq::experiments {

// Monte Carlo reduction of per-path squared-error trajectories.  Two
// functionals of the same data:
//
//   max_rms     max over time nodes of sqrt(mean over paths of err^2)
//               -- the headline error, what the rate targets refer to
//   rms_of_max  sqrt(mean over paths of the per-path worst node)
//               -- the pathwise-uniform surrogate, reported alongside
//
// Standard errors are delta-method: se(sqrt(m)) = se(m) / (2 sqrt(m)), with
// the mean's standard error taken at the already-selected worst node.  A
// single path reports zero dispersion; every study here runs many.
class TrajectoryErrorStats {
public:
    struct Value {
        double value = 0.0;
        double se = 0.0;
    };

    void add_path(const std::vector<double>& err_sq) {
        if (err_sq.empty()) throw AssumptionViolation("error trajectory is empty");
        if (m_ == 0) {
            sum_.assign(err_sq.size(), 0.0);
            sumsq_.assign(err_sq.size(), 0.0);
        } else if (err_sq.size() != sum_.size()) {
            throw AssumptionViolation("error trajectories must share one time grid");
        }
        double pmax = 0.0;
        for (std::size_t n = 0; n < err_sq.size(); ++n) {
            const double e = err_sq[n];
            sum_[n] += e;
            sumsq_[n] += e * e;
            if (e > pmax) pmax = e;
        }
        smax_ += pmax;
        smaxsq_ += pmax * pmax;
        ++m_;
    }

    std::size_t paths() const { return m_; }
    std::size_t nodes() const { return sum_.size(); }

    Value max_rms() const {
        require_data();
        std::size_t worst = 0;
        for (std::size_t n = 1; n < sum_.size(); ++n)
            if (sum_[n] > sum_[worst]) worst = n;
        return reduce(sum_[worst], sumsq_[worst]);
    }

    Value rms_of_max() const {
        require_data();
        return reduce(smax_, smaxsq_);
    }

    // sqrt(mean over paths) per time node, without dispersion
    std::vector<double> node_rms() const {
        require_data();
        std::vector<double> out(sum_.size(), 0.0);
        for (std::size_t n = 0; n < sum_.size(); ++n)
            out[n] = std::sqrt(sum_[n] / double(m_));
        return out;
    }

private:
    void require_data() const {
        if (m_ == 0) throw AssumptionViolation("no paths accumulated");
    }

    Value reduce(double s, double ssq) const {
        Value v;
        const double mean = s / double(m_);
        v.value = std::sqrt(std::max(mean, 0.0));
        if (m_ >= 2 && v.value > 0.0) {
            const double var = std::max(ssq - s * s / double(m_), 0.0) / double(m_ - 1);
            const double se_mean = std::sqrt(var / double(m_));
            v.se = 0.5 * se_mean / v.value;
        }
        return v;
    }

    std::vector<double> sum_, sumsq_;
    double smax_ = 0.0, smaxsq_ = 0.0;
    std::size_t m_ = 0;
};

}  // namespace sheq::experiments
