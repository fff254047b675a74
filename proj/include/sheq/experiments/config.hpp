#pragma once

#include <cstdint>
#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "../core.hpp"
#include "../evolution.hpp"

namespace sheq::experiments {

// A study is fully described by this struct plus the library version: runs
// are bit-reproducible from (config, seed).  The on-disk form is line
// oriented `key=value`; `#` starts a comment, lists are comma separated,
// unknown or duplicate keys are hard errors so a config never silently
// drifts past a typo.
struct StudyConfig {
    std::string study = "rates-time";  // rates-time | rates-space | rates-tol |
                                       // hoelder | gronwall | full | basis-check
    double beta = 1.0;                 // noise smoothness exponent
    double rho = 1.3;                  // mode variance decay, q_k = k^-rho
    std::uint64_t K = 512;             // spectral truncation of the noise
    double T = 1.0;
    std::string f = "sine";            // zero | sine | bounded
    double f_scale = 1.0;
    std::string u0 = "bump";           // zero | mode1 | bump
    std::vector<int> J_list;           // dyadic mesh levels (h = 2^-J)
    std::vector<std::uint64_t> N_list; // time step counts, powers of two
    std::vector<double> eps_list;      // per-trajectory tolerance sweep
    double eps_total = 1e-3;           // per-trajectory tolerance budget
    std::string eps_split = "flat";    // flat | linear split of eps_total
    std::vector<std::uint64_t> lag_list;  // increment lags in steps
    std::uint64_t M = 128;             // Monte Carlo sample count
    std::uint64_t seed = 2026;
    std::uint64_t refine = 16;         // reference refinement factor
    int quad_factor = 2;               // nonlinear quadrature mesh = qf * K
    bool silence_noise = false;        // zero the driving increments (debug oracle)
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw AssumptionViolation("config key '" + key + "': not a number: '" + v + "'");
    }
}

inline std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        long long x = std::stoll(v, &pos);
        if (pos != v.size() || x < 0) throw std::invalid_argument(v);
        return std::uint64_t(x);
    } catch (const std::exception&) {
        throw AssumptionViolation("config key '" + key + "': not a nonnegative integer: '" + v + "'");
    }
}

inline std::string fmt_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline bool is_pow2(std::uint64_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace detail

// Fills the per-study default ladders for lists the config left empty.
inline void apply_study_defaults(StudyConfig& c) {
    if (c.study == "rates-space") {
        if (c.J_list.empty()) c.J_list = {3, 4, 5, 6, 7, 8};
    } else if (c.study == "rates-time") {
        if (c.N_list.empty()) c.N_list = {8, 16, 32, 64, 128};
    } else if (c.study == "rates-tol") {
        if (c.J_list.empty()) c.J_list = {8};
        if (c.N_list.empty()) c.N_list = {8};
        if (c.eps_list.empty()) c.eps_list = {1e-2, 1e-3, 1e-4, 1e-5};
    } else if (c.study == "hoelder") {
        if (c.N_list.empty()) c.N_list = {4096};
        if (c.lag_list.empty()) c.lag_list = {1, 2, 4, 8, 16};
    } else if (c.study == "gronwall") {
        if (c.J_list.empty()) c.J_list = {3, 4, 5, 6, 7};
        if (c.N_list.empty()) c.N_list = {8};
    } else if (c.study == "full") {
        if (c.J_list.empty()) c.J_list = {3, 4, 5, 6};
    }
}

inline void validate(const StudyConfig& c) {
    static const char* kinds[] = {"rates-time", "rates-space", "rates-tol", "hoelder",
                                  "gronwall",   "full",        "basis-check"};
    bool known = false;
    for (const char* k : kinds) known = known || (c.study == k);
    if (!known) throw AssumptionViolation("unknown study kind: '" + c.study + "'");

    if (!(c.beta > 0.0)) throw AssumptionViolation("beta must be positive");
    if (!(c.rho > 2.0 * c.beta - 1.0))
        throw AssumptionViolation("regularity assumption violated: need rho > 2*beta - 1");
    if (!(c.T > 0.0)) throw AssumptionViolation("T must be positive");
    if (c.K < 1) throw AssumptionViolation("K must be at least 1");
    if (c.M < 1) throw AssumptionViolation("sample count must be at least 1");
    if (!detail::is_pow2(c.refine) || c.refine < 2)
        throw AssumptionViolation("refine must be a power of two, at least 2");
    if (c.quad_factor < 1) throw AssumptionViolation("quad_factor must be at least 1");
    if (c.eps_split != "flat" && c.eps_split != "linear")
        throw AssumptionViolation("eps_split must be 'flat' or 'linear'");
    if (!(c.eps_total > 0.0)) throw AssumptionViolation("eps_total must be positive");

    for (std::size_t i = 0; i < c.J_list.size(); ++i) {
        if (c.J_list[i] < 3) throw AssumptionViolation("mesh levels start at 3");
        if (i && c.J_list[i] <= c.J_list[i - 1])
            throw AssumptionViolation("mesh level list must be strictly increasing");
    }
    for (std::size_t i = 0; i < c.N_list.size(); ++i) {
        if (!detail::is_pow2(c.N_list[i]))
            throw AssumptionViolation("step counts must be powers of two (dyadic refinement)");
        if (i && c.N_list[i] <= c.N_list[i - 1])
            throw AssumptionViolation("step count list must be strictly increasing");
    }
    for (std::size_t i = 0; i < c.lag_list.size(); ++i) {
        if (!detail::is_pow2(c.lag_list[i]))
            throw AssumptionViolation("lags must be powers of two (dyadic refinement)");
        if (i && c.lag_list[i] <= c.lag_list[i - 1])
            throw AssumptionViolation("lag list must be strictly increasing");
    }
    for (std::size_t i = 0; i < c.eps_list.size(); ++i) {
        if (!(c.eps_list[i] > 0.0)) throw AssumptionViolation("tolerances must be positive");
        if (i && c.eps_list[i] >= c.eps_list[i - 1])
            throw AssumptionViolation("tolerance sweep must be strictly decreasing");
    }

    // The implicit step is only contractive under tau * Lip(f) < 1/2; check
    // against the coarsest step count that will actually run.
    const Nonlinearity nl = make_nonlinearity(c.f, c.f_scale);
    if (nl.lip > 0.0 && !c.N_list.empty()) {
        const double tau_max = c.T / double(c.N_list.front());
        if (tau_max * nl.lip >= 0.5)
            throw AssumptionViolation(
                "tau * Lipschitz must stay below 1/2 for the implicit step (coarsest N fails)");
    }
    if (!c.lag_list.empty() && !c.N_list.empty() && c.lag_list.back() >= c.N_list.front())
        throw AssumptionViolation("largest lag must stay below the step count");
}

// Canonical one-line-per-key form: fixed key order, lists comma joined,
// doubles at full precision.  The config hash is FNV-1a over this text.
inline std::string canonical_text(const StudyConfig& c) {
    std::ostringstream os;
    os << "study=" << c.study << "\n";
    os << "beta=" << detail::fmt_double(c.beta) << "\n";
    os << "rho=" << detail::fmt_double(c.rho) << "\n";
    os << "K=" << c.K << "\n";
    os << "T=" << detail::fmt_double(c.T) << "\n";
    os << "f=" << c.f << "\n";
    os << "f_scale=" << detail::fmt_double(c.f_scale) << "\n";
    os << "u0=" << c.u0 << "\n";
    auto join = [&os](const char* key, auto const& list, auto fmt) {
        os << key << "=";
        for (std::size_t i = 0; i < list.size(); ++i) os << (i ? "," : "") << fmt(list[i]);
        os << "\n";
    };
    join("J_list", c.J_list, [](int v) { return std::to_string(v); });
    join("N_list", c.N_list, [](std::uint64_t v) { return std::to_string(v); });
    join("eps_list", c.eps_list, detail::fmt_double);
    os << "eps_total=" << detail::fmt_double(c.eps_total) << "\n";
    os << "eps_split=" << c.eps_split << "\n";
    join("lag_list", c.lag_list, [](std::uint64_t v) { return std::to_string(v); });
    os << "M=" << c.M << "\n";
    os << "seed=" << c.seed << "\n";
    os << "refine=" << c.refine << "\n";
    os << "quad_factor=" << c.quad_factor << "\n";
    os << "silence_noise=" << (c.silence_noise ? 1 : 0) << "\n";
    return os.str();
}

inline std::uint64_t config_hash(const StudyConfig& c) {
    const std::string text = canonical_text(c);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char b : text) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

inline StudyConfig parse_config(std::istream& in) {
    StudyConfig c;
    std::vector<std::string> seen;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw AssumptionViolation("config line " + std::to_string(lineno) +
                                      ": expected key=value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        for (const auto& s : seen)
            if (s == key)
                throw AssumptionViolation("config key '" + key + "' given twice");
        seen.push_back(key);

        if (key == "study") c.study = val;
        else if (key == "beta") c.beta = detail::to_double(key, val);
        else if (key == "rho") c.rho = detail::to_double(key, val);
        else if (key == "K") c.K = detail::to_u64(key, val);
        else if (key == "T") c.T = detail::to_double(key, val);
        else if (key == "f") c.f = val;
        else if (key == "f_scale") c.f_scale = detail::to_double(key, val);
        else if (key == "u0") c.u0 = val;
        else if (key == "eps_total") c.eps_total = detail::to_double(key, val);
        else if (key == "eps_split") c.eps_split = val;
        else if (key == "M") c.M = detail::to_u64(key, val);
        else if (key == "seed") c.seed = detail::to_u64(key, val);
        else if (key == "refine") c.refine = detail::to_u64(key, val);
        else if (key == "quad_factor") c.quad_factor = int(detail::to_u64(key, val));
        else if (key == "silence_noise") c.silence_noise = detail::to_u64(key, val) != 0;
        else if (key == "J_list") {
            for (const auto& v : detail::split_list(val))
                c.J_list.push_back(int(detail::to_u64(key, v)));
        } else if (key == "N_list") {
            for (const auto& v : detail::split_list(val))
                c.N_list.push_back(detail::to_u64(key, v));
        } else if (key == "eps_list") {
            for (const auto& v : detail::split_list(val))
                c.eps_list.push_back(detail::to_double(key, v));
        } else if (key == "lag_list") {
            for (const auto& v : detail::split_list(val))
                c.lag_list.push_back(detail::to_u64(key, v));
        } else {
            throw AssumptionViolation("unknown config key: '" + key + "'");
        }
    }
    apply_study_defaults(c);
    validate(c);
    return c;
}

// Per-step tolerance schedule implied by (eps_total, eps_split): `flat`
// spends the budget evenly, `linear` ramps it proportional to the step index
// (cheap early steps, relaxed late ones); both sum to eps_total exactly.
inline std::vector<double> split_tolerance(double eps_total, std::uint64_t N,
                                           const std::string& rule) {
    std::vector<double> eps(N, 0.0);
    if (rule == "flat") {
        for (auto& e : eps) e = eps_total / double(N);
    } else if (rule == "linear") {
        const double denom = 0.5 * double(N) * double(N + 1);
        for (std::uint64_t n = 0; n < N; ++n) eps[n] = eps_total * double(n + 1) / denom;
    } else {
        throw AssumptionViolation("eps_split must be 'flat' or 'linear'");
    }
    return eps;
}

}  // namespace sheq::experiments
