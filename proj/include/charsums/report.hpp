#pragma once

// SumReport: one verified identity/bound instance, serializable to JSON lines
// (one object per line, keys sorted, floats at 17 significant digits) and to
// CSV with a fixed header in canonical (q, chi, psi, m-tuple, r) order. Both
// formats are byte-deterministic for a fixed input set.

#include <algorithm>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "charsums/core.hpp"

namespace charsums {

using ParamValue = std::variant<std::int64_t, double, std::string>;

struct SumReport {
    std::string identity;
    std::map<std::string, ParamValue> params;
    Complex lhs{0.0, 0.0};
    Complex rhs{0.0, 0.0};
    double residual = 0.0;
    double scale = 0.0;
    bool pass = false;
};

inline SumReport make_report(std::string identity, std::map<std::string, ParamValue> params, Complex lhs,
                             Complex rhs, double scale) {
    SumReport r;
    r.identity = std::move(identity);
    r.params = std::move(params);
    r.lhs = lhs;
    r.rhs = rhs;
    if (!is_finite(lhs) || !is_finite(rhs))
        throw NumericalError("SumReport: non-finite value in identity " + r.identity);
    r.residual = std::abs(lhs - rhs);
    r.scale = scale;
    r.pass = r.residual <= scale;
    return r;
}

// A bound-type report: pass iff |value| <= bound (with a small relative slack
// folded into scale by the caller via `slack`).
inline SumReport make_bound_report(std::string identity, std::map<std::string, ParamValue> params, double value,
                                   double bound, double slack = 1e-9) {
    SumReport r;
    r.identity = std::move(identity);
    r.params = std::move(params);
    r.lhs = Complex(value, 0.0);
    r.rhs = Complex(bound, 0.0);
    if (!std::isfinite(value) || !std::isfinite(bound))
        throw NumericalError("SumReport: non-finite value in identity " + r.identity);
    r.residual = std::max(0.0, value - bound);
    r.scale = slack * std::max(1.0, bound);
    r.pass = r.residual <= r.scale;
    return r;
}

namespace detail {

inline std::string format_double(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += ch;
        }
    }
    return out;
}

inline std::string param_to_json(const ParamValue& v) {
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<double>(v)) return format_double(std::get<double>(v));
    return "\"" + json_escape(std::get<std::string>(v)) + "\"";
}

inline std::string param_to_csv(const ParamValue& v) {
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<double>(v)) return format_double(std::get<double>(v));
    return std::get<std::string>(v);
}

inline std::string param_sort_token(const SumReport& r, const std::string& key) {
    auto it = r.params.find(key);
    if (it == r.params.end()) return "";
    if (std::holds_alternative<std::int64_t>(it->second)) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%020lld", static_cast<long long>(std::get<std::int64_t>(it->second)));
        return buf;
    }
    return param_to_csv(it->second);
}

}  // namespace detail

// Canonical emission order: identity, then (q, chi, psi, m1, m2, m3, r), then
// the remaining params serialized; independent of production order.
inline void canonical_sort(std::vector<SumReport>& reports) {
    auto key_of = [](const SumReport& r) {
        std::string k = r.identity;
        for (const char* p : {"q", "chi", "psi", "m1", "m2", "m3", "r", "k", "j", "mode", "sigma", "w"}) {
            k += '\x1f';
            k += detail::param_sort_token(r, p);
        }
        for (const auto& [pk, pv] : r.params) {
            k += '\x1f';
            k += pk;
            k += '=';
            k += detail::param_to_csv(pv);
        }
        return k;
    };
    std::stable_sort(reports.begin(), reports.end(),
                     [&](const SumReport& a, const SumReport& b) { return key_of(a) < key_of(b); });
}

inline std::string to_json_line(const SumReport& r) {
    // Top-level keys emitted in sorted order by construction.
    std::string s = "{\"identity\":\"" + detail::json_escape(r.identity) + "\"";
    s += ",\"lhs_im\":" + detail::format_double(r.lhs.imag());
    s += ",\"lhs_re\":" + detail::format_double(r.lhs.real());
    s += ",\"params\":{";
    bool first = true;
    for (const auto& [k, v] : r.params) {
        if (!first) s += ',';
        first = false;
        s += "\"" + detail::json_escape(k) + "\":" + detail::param_to_json(v);
    }
    s += "}";
    s += ",\"pass\":";
    s += (r.pass ? "true" : "false");
    s += ",\"residual\":" + detail::format_double(r.residual);
    s += ",\"rhs_im\":" + detail::format_double(r.rhs.imag());
    s += ",\"rhs_re\":" + detail::format_double(r.rhs.real());
    s += ",\"scale\":" + detail::format_double(r.scale);
    s += "}";
    return s;
}

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "identity", "q",      "chi",    "psi",    "m1",     "m2",   "m3",       "r",
        "k",        "j",      "mode",   "sigma",  "w",      "note", "lhs_re",   "lhs_im",
        "rhs_re",   "rhs_im", "ratio",  "residual", "scale", "pass"};
    return cols;
}

inline std::string to_csv_row(const SumReport& r) {
    std::string s;
    bool first = true;
    for (const auto& col : csv_columns()) {
        if (!first) s += ',';
        first = false;
        if (col == "identity") s += r.identity;
        else if (col == "lhs_re") s += detail::format_double(r.lhs.real());
        else if (col == "lhs_im") s += detail::format_double(r.lhs.imag());
        else if (col == "rhs_re") s += detail::format_double(r.rhs.real());
        else if (col == "rhs_im") s += detail::format_double(r.rhs.imag());
        else if (col == "residual") s += detail::format_double(r.residual);
        else if (col == "scale") s += detail::format_double(r.scale);
        else if (col == "pass") s += (r.pass ? '1' : '0');
        else {
            auto it = r.params.find(col);
            if (it != r.params.end()) s += detail::param_to_csv(it->second);
        }
    }
    return s;
}

enum class ReportFormat { json, csv };

// Serializes a finalized report sequence. Returns false on stream failure.
inline bool report_emit(const std::vector<SumReport>& reports, ReportFormat fmt, std::ostream& out) {
    if (fmt == ReportFormat::csv) {
        std::string header;
        for (std::size_t i = 0; i < csv_columns().size(); ++i) {
            if (i) header += ',';
            header += csv_columns()[i];
        }
        out << header << '\n';
        for (const auto& r : reports) out << to_csv_row(r) << '\n';
    } else {
        for (const auto& r : reports) out << to_json_line(r) << '\n';
    }
    out.flush();
    return static_cast<bool>(out);
}

}  // namespace charsums
