#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "../core.hpp"
#include "basis.hpp"

namespace sheq {

// The basis is defined by a handful of exact dyadic-rational filters.  They
// are compiled in (see basis.hpp / transforms.hpp) and also serialized as a
// small text table so the numbers exist as data, independently of the code:
//
//   format <version>
//   <name> <count> <entry> ... <entry>
//
// one filter per line, entries exact rationals `a/b` or plain decimals.
// Everything else is comment.  `verify_filter_table` cross-checks a parsed
// table against the compiled constants entry by entry; the checked-in copy
// under data/ and the generator below must never drift apart.
struct FilterTable {
    int format = 0;
    struct Row {
        std::string name;
        std::vector<double> values;
    };
    std::vector<Row> rows;

    const std::vector<double>& at(const std::string& name) const {
        for (const auto& r : rows)
            if (r.name == name) return r.values;
        throw AssumptionViolation("filter table has no row named '" + name + "'");
    }
};

namespace detail {

inline double parse_rational(const std::string& tok) {
    const std::size_t slash = tok.find('/');
    try {
        if (slash == std::string::npos) {
            std::size_t pos = 0;
            double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            return v;
        }
        std::size_t pa = 0, pb = 0;
        const std::string a = tok.substr(0, slash), b = tok.substr(slash + 1);
        double num = std::stod(a, &pa), den = std::stod(b, &pb);
        if (pa != a.size() || pb != b.size() || den == 0.0) throw std::invalid_argument(tok);
        return num / den;
    } catch (const std::exception&) {
        throw AssumptionViolation("filter table: bad entry '" + tok + "'");
    }
}

}  // namespace detail

inline FilterTable parse_filter_table(std::istream& in) {
    FilterTable t;
    std::string line;
    int lineno = 0;
    bool saw_format = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream row(line);
        std::string name;
        if (!(row >> name)) continue;
        if (!saw_format) {
            if (name != "format")
                throw AssumptionViolation("filter table must start with a format line");
            if (!(row >> t.format) || t.format != 1)
                throw AssumptionViolation("unsupported filter table format");
            saw_format = true;
            continue;
        }
        std::size_t count = 0;
        if (!(row >> count) || count == 0)
            throw AssumptionViolation("filter table line " + std::to_string(lineno) +
                                      ": expected <name> <count> <entries>");
        FilterTable::Row r;
        r.name = name;
        for (std::size_t i = 0; i < count; ++i) {
            std::string tok;
            if (!(row >> tok))
                throw AssumptionViolation("filter table line " + std::to_string(lineno) +
                                          ": fewer entries than declared");
            r.values.push_back(detail::parse_rational(tok));
        }
        std::string extra;
        if (row >> extra)
            throw AssumptionViolation("filter table line " + std::to_string(lineno) +
                                      ": more entries than declared");
        t.rows.push_back(std::move(r));
    }
    if (!saw_format) throw AssumptionViolation("filter table is empty");
    return t;
}

// The canonical serialization of the compiled filters.  The checked-in data
// file is exactly this string; regenerate it from here if the schema ever
// gains a version.
inline std::string canonical_filter_table() {
    return
        "# Filters of the piecewise-linear interval wavelet basis (homogeneous\n"
        "# Dirichlet).  Schema: a `format <version>` line, then one filter per\n"
        "# line as `<name> <count> <entries...>`; entries are exact rationals\n"
        "# a/b or plain decimals; `#` starts a comment.\n"
        "#\n"
        "# refinement  two-scale mask of the hat function: a coarse hat equals\n"
        "#             this combination of the three fine hats under its tent.\n"
        "# interior    wavelet mask on the five fine-mesh nodes of its support;\n"
        "#             built to kill constants and linears (two primal moments).\n"
        "# boundary    folded three-node mask used at the first and last\n"
        "#             position of each level.\n"
        "# root_scale  amplitude of the three coarsest functions relative to\n"
        "#             the mesh-2 hats they are.\n"
        "# norm_sq     common squared L2 norm of every basis function; levels\n"
        "#             j >= 1 reach it through the amplitude 2^((j+2)/2).\n"
        "#\n"
        "# The dual pair completing the biorthogonal system has two dual\n"
        "# vanishing moments (mtilde = 2) and positive Sobolev smoothness\n"
        "# stilde; those parameters are design bookkeeping, recorded here and\n"
        "# asserted by no check.\n"
        "format 1\n"
        "refinement 3 1/2 1 1/2\n"
        "interior 5 -1/8 -1/4 3/4 -1/4 -1/8\n"
        "boundary 3 3/8 -3/4 3/8\n"
        "root_scale 1 3/2\n"
        "norm_sq 1 3/8\n";
}

// Entry-by-entry comparison against the compiled constants.  Exact equality
// is the right test: every entry is a dyadic rational, representable without
// rounding on both sides.
inline void verify_filter_table(const FilterTable& t) {
    auto check = [](const std::vector<double>& got, const std::vector<double>& want,
                    const char* name) {
        if (got.size() != want.size())
            throw AssumptionViolation(std::string("filter '") + name + "': wrong length");
        for (std::size_t i = 0; i < want.size(); ++i)
            if (got[i] != want[i])
                throw AssumptionViolation(std::string("filter '") + name +
                                          "': entry mismatch at index " + std::to_string(i));
    };
    if (t.format != 1) throw AssumptionViolation("unsupported filter table format");
    check(t.at("refinement"), {0.5, 1.0, 0.5}, "refinement");
    check(t.at("interior"),
          {WAVELET_INTERIOR_MASK[0], WAVELET_INTERIOR_MASK[1], WAVELET_INTERIOR_MASK[2],
           WAVELET_INTERIOR_MASK[3], WAVELET_INTERIOR_MASK[4]},
          "interior");
    check(t.at("boundary"),
          {WAVELET_BOUNDARY_MASK[0], WAVELET_BOUNDARY_MASK[1], WAVELET_BOUNDARY_MASK[2]},
          "boundary");
    check(t.at("root_scale"), {ROOT_SCALE}, "root_scale");
    check(t.at("norm_sq"), {WAVELET_NORM_SQ}, "norm_sq");
}

}  // namespace sheq
