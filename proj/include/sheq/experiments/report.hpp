#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "../core.hpp"
#include "../evolution.hpp"
#include "config.hpp"
#include "fit.hpp"

namespace sheq::experiments {

// One fitted error ladder.  A study may emit several (the headline
// functional plus the pathwise surrogate, or one ladder per refinement
// knob); each carries its own rows and fit and lands in the same CSV,
// distinguished by the `study` tag.
struct RateReport {
    std::string study;  // e.g. "rates-space" or "rates-space+pathmax"
    struct Row {
        double level = 0.0;      // refinement index the fit runs against
        double error_rms = 0.0;  // the ladder's error functional at this level
        double se = 0.0;         // Monte Carlo standard error of that value
    };
    std::vector<Row> rows;
    bool has_fit = false;
    RateFit fit;
    double target_slope = 0.0;  // stated goal for this ladder, 0 if none
    double slope_tol = 0.0;
};

// Everything a study run produces.  `scalars` carries named check values
// (certificate margins, lemma ratios, plateau diagnostics) so callers gate
// on numbers the study itself computed; `notes` is the human-readable trail
// of the same checks; `flagged` marks an inconclusive or suspicious run.
struct StudyResult {
    StudyConfig config;
    std::vector<RateReport> reports;
    std::vector<StepStats> stats;
    std::vector<std::string> notes;
    std::map<std::string, double> scalars;
    bool flagged = false;

    const RateReport& report(const std::string& name) const {
        for (const auto& r : reports)
            if (r.study == name) return r;
        throw AssumptionViolation("no report ladder named '" + name + "'");
    }
    double scalar(const std::string& name) const {
        auto it = scalars.find(name);
        if (it == scalars.end())
            throw AssumptionViolation("no scalar check named '" + name + "'");
        return it->second;
    }
};

namespace detail {

inline std::string fmt_sci(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6e", x);
    return buf;
}

inline std::string fmt_level(double x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

}  // namespace detail

// report.csv: one row per (ladder, level); the fitted slope and its band are
// repeated on each row of the ladder they belong to.
inline std::string report_csv(const std::vector<RateReport>& reports) {
    std::string out = "study,level,error_rms,stderr,slope,slope_ci_lo,slope_ci_hi\n";
    for (const auto& r : reports) {
        for (const auto& row : r.rows) {
            out += r.study;
            out += ',';
            out += detail::fmt_level(row.level);
            out += ',';
            out += detail::fmt_sci(row.error_rms);
            out += ',';
            out += detail::fmt_sci(row.se);
            out += ',';
            if (r.has_fit) {
                out += detail::fmt_sci(r.fit.slope);
                out += ',';
                out += detail::fmt_sci(r.fit.ci_lo);
                out += ',';
                out += detail::fmt_sci(r.fit.ci_hi);
            } else {
                out += ",,";
            }
            out += '\n';
        }
    }
    return out;
}

// stats.csv: the adaptive solver's per-step work record, one row per
// (path, time step).
inline std::string stats_csv(const std::vector<StepStats>& stats) {
    std::string out = "path_id,n,eps_n,support,iterations,op_count,residual\n";
    for (const auto& s : stats) {
        out += std::to_string(s.path_id);
        out += ',';
        out += std::to_string(s.n);
        out += ',';
        out += detail::fmt_sci(s.eps_n);
        out += ',';
        out += std::to_string(s.support);
        out += ',';
        out += std::to_string(s.iterations);
        out += ',';
        out += std::to_string(s.op_count);
        out += ',';
        out += detail::fmt_sci(s.residual);
        out += '\n';
    }
    return out;
}

// config_echo.txt: the canonical config, the derived design (per-ladder
// targets and tolerances), and run metadata.  Reports are self-describing:
// every gate a reader might check against is stated here.
inline std::string config_echo(const StudyConfig& cfg,
                               const std::vector<std::string>& derived) {
    std::string out;
    out += "# study configuration (canonical form)\n";
    out += canonical_text(cfg);
    out += "# derived design and gates\n";
    for (const auto& d : derived) {
        out += "# ";
        out += d;
        out += '\n';
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%016llx", (unsigned long long)config_hash(cfg));
    out += "# config_hash=";
    out += buf;
    out += '\n';
    out += "# version=";
    out += SHEQ_VERSION;
    out += '\n';
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw AssumptionViolation("cannot open for writing: " + path.string());
    f << content;
    if (!f) throw AssumptionViolation("write failed: " + path.string());
}

}  // namespace sheq::experiments
