#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "driftcomp/diagnostics.hpp"
#include "driftcomp/initial_conditions.hpp"
#include "driftcomp/integrate.hpp"
#include "driftcomp/model.hpp"

// Flat key = value configuration documents. The key list below is the
// complete public contract; unknown keys are hard errors so typos never
// pass silently. `m` and `t_end` are required, everything else defaults.
// `m` and the ic_*_table keys accept comma-separated per-cell lists.

namespace driftcomp {

struct ConfigBundle {
    ModelConfig cfg;
    InitialConditionSpec ic_u;
    InitialConditionSpec ic_v;
    StepControl ctl;
    DiagnosticsThresholds diag;

    bool operator==(const ConfigBundle&) const = default;
};

enum class ParseErrorCode { PARSE_ERROR, UNKNOWN_KEY };

inline const char* to_string(ParseErrorCode c) {
    return c == ParseErrorCode::PARSE_ERROR ? "PARSE_ERROR" : "UNKNOWN_KEY";
}

class ParseError : public std::runtime_error {
public:
    ParseError(ParseErrorCode code, int line, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + " at line " +
                             std::to_string(line) + ": " + what),
          code_(code),
          line_(line) {}

    ParseErrorCode code() const { return code_; }
    int line() const { return line_; }

private:
    ParseErrorCode code_;
    int line_;
};

// Canonical key order; also the dump order.
inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k = {
            "length", "n_cells", "d1", "d2", "k_u", "k_v", "p_u", "p_v",
            "epsilon", "drift_q", "drift_enabled", "m", "t_end",
        };
        for (const char* sp : {"u", "v"})
            for (const char* f : {"family", "amplitude", "center", "width", "amplitude2",
                                  "center2", "width2", "left", "right", "edge", "table"})
                k.push_back(std::string("ic_") + sp + "_" + f);
        for (const char* f : {"cfl_safety", "dt_max", "dt_min", "fixed_dt",
                              "nonneg_clip_tolerance", "exclusion_threshold",
                              "survival_threshold", "extinction_threshold"})
            k.push_back(f);
        return k;
    }();
    return keys;
}

namespace detail {

inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

struct KvDoc {
    // Insertion-ordered (key, value, line) triples.
    std::vector<std::string> keys;
    std::vector<std::string> values;
    std::vector<int> lines;

    int find(const std::string& key) const {
        for (std::size_t i = 0; i < keys.size(); ++i)
            if (keys[i] == key) return static_cast<int>(i);
        return -1;
    }

    void set(const std::string& key, std::string value) {
        const int i = find(key);
        if (i >= 0) {
            values[static_cast<std::size_t>(i)] = std::move(value);
        } else {
            keys.push_back(key);
            values.push_back(std::move(value));
            lines.push_back(0);
        }
    }
};

inline KvDoc parse_kv(std::string_view text) {
    KvDoc doc;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                              : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;

        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        std::string stripped = trim(line);
        if (stripped.empty()) continue;

        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ParseError(ParseErrorCode::PARSE_ERROR, line_no, "expected key = value");
        std::string key = trim(std::string_view(stripped).substr(0, eq));
        std::string value = trim(std::string_view(stripped).substr(eq + 1));
        if (key.empty())
            throw ParseError(ParseErrorCode::PARSE_ERROR, line_no, "empty key");
        if (doc.find(key) >= 0)
            throw ParseError(ParseErrorCode::PARSE_ERROR, line_no, "duplicate key '" + key + "'");
        doc.keys.push_back(std::move(key));
        doc.values.push_back(std::move(value));
        doc.lines.push_back(line_no);
    }
    return doc;
}

inline double parse_double(const std::string& value, const std::string& key, int line) {
    const char* s = value.c_str();
    char* end = nullptr;
    const double x = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw ParseError(ParseErrorCode::PARSE_ERROR, line,
                         "key '" + key + "': not a number: '" + value + "'");
    return x;
}

inline std::vector<double> parse_list(const std::string& value, const std::string& key,
                                      int line) {
    std::vector<double> out;
    if (trim(value).empty()) return out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const std::size_t comma = value.find(',', start);
        const std::string item =
            trim(std::string_view(value).substr(start, comma == std::string::npos
                                                           ? value.size() - start
                                                           : comma - start));
        out.push_back(parse_double(item, key, line));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

}  // namespace detail

// Builds a fully validated bundle from parsed key-value pairs, filling
// defaults for absent keys. Throws ParseError for unknown keys or malformed
// values and ConfigError when the resulting bundle violates invariants.
inline ConfigBundle bundle_from_kv(const detail::KvDoc& doc) {
    const auto& known = config_keys();
    for (std::size_t i = 0; i < doc.keys.size(); ++i) {
        bool ok = false;
        for (const auto& k : known)
            if (k == doc.keys[i]) {
                ok = true;
                break;
            }
        if (!ok)
            throw ParseError(ParseErrorCode::UNKNOWN_KEY, doc.lines[i],
                             "unknown key '" + doc.keys[i] + "'");
    }

    auto lookup = [&](const std::string& key) -> const std::string* {
        const int i = doc.find(key);
        return i < 0 ? nullptr : &doc.values[static_cast<std::size_t>(i)];
    };
    auto line_of = [&](const std::string& key) {
        const int i = doc.find(key);
        return i < 0 ? 0 : doc.lines[static_cast<std::size_t>(i)];
    };
    auto get_d = [&](const std::string& key, double dflt) {
        const std::string* v = lookup(key);
        return v ? detail::parse_double(*v, key, line_of(key)) : dflt;
    };
    auto get_bool = [&](const std::string& key, bool dflt) {
        const std::string* v = lookup(key);
        if (!v) return dflt;
        if (*v == "true") return true;
        if (*v == "false") return false;
        throw ParseError(ParseErrorCode::PARSE_ERROR, line_of(key),
                         "key '" + key + "': expected true/false, got '" + *v + "'");
    };
    auto require = [&](const std::string& key) {
        if (!lookup(key))
            throw ParseError(ParseErrorCode::PARSE_ERROR, 0, "required key '" + key + "' missing");
    };

    require("m");
    require("t_end");

    ConfigBundle b;
    b.cfg.grid.length = get_d("length", 1.0);
    const double n_cells = get_d("n_cells", 300);
    if (n_cells != std::floor(n_cells) || n_cells < 0 || n_cells > 1e9)
        throw ParseError(ParseErrorCode::PARSE_ERROR, line_of("n_cells"),
                         "key 'n_cells': expected a nonnegative integer");
    b.cfg.grid.n_cells = static_cast<int>(n_cells);
    b.cfg.disp_u.d = get_d("d1", 0.2);
    b.cfg.disp_v.d = get_d("d2", 0.3);
    b.cfg.disp_u.k = get_d("k_u", 0.0);
    b.cfg.disp_v.k = get_d("k_v", 1.0);
    b.cfg.disp_u.p = get_d("p_u", 2.0);
    b.cfg.disp_v.p = get_d("p_v", 2.0);
    const double eps = get_d("epsilon", 1e-4);
    b.cfg.disp_u.epsilon = eps;
    b.cfg.disp_v.epsilon = eps;
    b.cfg.drift_q = get_d("drift_q", 0.5);
    b.cfg.drift_enabled = get_bool("drift_enabled", true);
    b.cfg.resource_m = detail::parse_list(*lookup("m"), "m", line_of("m"));
    if (b.cfg.resource_m.empty())
        throw ParseError(ParseErrorCode::PARSE_ERROR, line_of("m"), "key 'm': empty list");

    auto load_ic = [&](const char* sp, InitialConditionSpec dflt) {
        const std::string pre = std::string("ic_") + sp + "_";
        InitialConditionSpec ic = dflt;
        if (const std::string* v = lookup(pre + "family")) {
            auto fam = ic_family_from_string(*v);
            if (!fam)
                throw ParseError(ParseErrorCode::PARSE_ERROR, line_of(pre + "family"),
                                 "unknown initial-condition family '" + *v + "'");
            ic.family = *fam;
        }
        ic.amplitude = get_d(pre + "amplitude", ic.amplitude);
        ic.center = get_d(pre + "center", ic.center);
        ic.width = get_d(pre + "width", ic.width);
        ic.amplitude2 = get_d(pre + "amplitude2", ic.amplitude2);
        ic.center2 = get_d(pre + "center2", ic.center2);
        ic.width2 = get_d(pre + "width2", ic.width2);
        ic.left = get_d(pre + "left", ic.left);
        ic.right = get_d(pre + "right", ic.right);
        ic.edge = get_d(pre + "edge", ic.edge);
        if (const std::string* v = lookup(pre + "table"))
            ic.table = detail::parse_list(*v, pre + "table", line_of(pre + "table"));
        return ic;
    };
    // Default layout: u seeded upstream, v downstream, both below m = 1.
    b.ic_u = load_ic("u", InitialConditionSpec::gaussian(0.5, 0.3 * b.cfg.grid.length, 0.1 * b.cfg.grid.length));
    b.ic_v = load_ic("v", InitialConditionSpec::gaussian(0.5, 0.7 * b.cfg.grid.length, 0.1 * b.cfg.grid.length));

    b.ctl.cfl_safety = get_d("cfl_safety", 0.4);
    b.ctl.dt_max = get_d("dt_max", 0.05);
    b.ctl.dt_min = get_d("dt_min", 1e-12);
    b.ctl.fixed_dt = get_d("fixed_dt", 0.0);
    b.ctl.nonneg_clip_tolerance = get_d("nonneg_clip_tolerance", 1e-12);
    b.ctl.t_end = get_d("t_end", 1.0);

    const DiagnosticsThresholds dflt = DiagnosticsThresholds::defaults_for(b.cfg.m_mean());
    b.diag.exclusion = get_d("exclusion_threshold", dflt.exclusion);
    b.diag.survival = get_d("survival_threshold", dflt.survival);
    b.diag.extinction = get_d("extinction_threshold", dflt.extinction);

    // Cross-field validation, collected in one pass.
    std::vector<ConfigIssue> issues = validate_config(b.cfg);
    if (!(b.ctl.cfl_safety > 0.0 && b.ctl.cfl_safety <= 1.0))
        issues.push_back({ConfigErrorCode::STEP_CONTROL_INVALID, "cfl_safety",
                          "must lie in (0, 1]"});
    if (!(b.ctl.dt_min > 0.0) || !(b.ctl.dt_max >= b.ctl.dt_min))
        issues.push_back({ConfigErrorCode::STEP_CONTROL_INVALID, "dt_min",
                          "need 0 < dt_min <= dt_max"});
    if (b.ctl.fixed_dt < 0.0)
        issues.push_back({ConfigErrorCode::STEP_CONTROL_INVALID, "fixed_dt",
                          "must be nonnegative"});
    if (b.ctl.nonneg_clip_tolerance < 0.0)
        issues.push_back({ConfigErrorCode::STEP_CONTROL_INVALID, "nonneg_clip_tolerance",
                          "must be nonnegative"});
    if (!(b.ctl.t_end >= 0.0))
        issues.push_back({ConfigErrorCode::STEP_CONTROL_INVALID, "t_end",
                          "must be nonnegative"});
    if (!(b.diag.exclusion > 0.0 && b.diag.survival > b.diag.exclusion))
        issues.push_back({ConfigErrorCode::THRESHOLDS_INVALID, "exclusion_threshold",
                          "need 0 < exclusion < survival"});
    if (!(b.diag.extinction > 0.0))
        issues.push_back({ConfigErrorCode::THRESHOLDS_INVALID, "extinction_threshold",
                          "must be positive"});
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return b;
}

inline detail::KvDoc kv_from_bundle(const ConfigBundle& b) {
    detail::KvDoc doc;
    auto put = [&](const std::string& key, std::string value) {
        doc.keys.push_back(key);
        doc.values.push_back(std::move(value));
        doc.lines.push_back(0);
    };
    auto put_d = [&](const std::string& key, double x) { put(key, detail::fmt_double(x)); };
    auto put_list = [&](const std::string& key, const std::vector<double>& xs) {
        std::string s;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i) s += ",";
            s += detail::fmt_double(xs[i]);
        }
        put(key, s);
    };

    put_d("length", b.cfg.grid.length);
    put("n_cells", std::to_string(b.cfg.grid.n_cells));
    put_d("d1", b.cfg.disp_u.d);
    put_d("d2", b.cfg.disp_v.d);
    put_d("k_u", b.cfg.disp_u.k);
    put_d("k_v", b.cfg.disp_v.k);
    put_d("p_u", b.cfg.disp_u.p);
    put_d("p_v", b.cfg.disp_v.p);
    put_d("epsilon", b.cfg.disp_v.epsilon);
    put_d("drift_q", b.cfg.drift_q);
    put("drift_enabled", b.cfg.drift_enabled ? "true" : "false");
    put_list("m", b.cfg.resource_m);
    put_d("t_end", b.ctl.t_end);

    auto put_ic = [&](const char* sp, const InitialConditionSpec& ic) {
        const std::string pre = std::string("ic_") + sp + "_";
        put(pre + "family", to_string(ic.family));
        put_d(pre + "amplitude", ic.amplitude);
        put_d(pre + "center", ic.center);
        put_d(pre + "width", ic.width);
        put_d(pre + "amplitude2", ic.amplitude2);
        put_d(pre + "center2", ic.center2);
        put_d(pre + "width2", ic.width2);
        put_d(pre + "left", ic.left);
        put_d(pre + "right", ic.right);
        put_d(pre + "edge", ic.edge);
        put_list(pre + "table", ic.table);
    };
    put_ic("u", b.ic_u);
    put_ic("v", b.ic_v);

    put_d("cfl_safety", b.ctl.cfl_safety);
    put_d("dt_max", b.ctl.dt_max);
    put_d("dt_min", b.ctl.dt_min);
    put_d("fixed_dt", b.ctl.fixed_dt);
    put_d("nonneg_clip_tolerance", b.ctl.nonneg_clip_tolerance);
    put_d("exclusion_threshold", b.diag.exclusion);
    put_d("survival_threshold", b.diag.survival);
    put_d("extinction_threshold", b.diag.extinction);
    return doc;
}

inline ConfigBundle load_config_text(std::string_view text) {
    return bundle_from_kv(detail::parse_kv(text));
}

inline ConfigBundle load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ParseError(ParseErrorCode::PARSE_ERROR, 0, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_config_text(ss.str());
}

inline std::string dump_config(const ConfigBundle& b) {
    const detail::KvDoc doc = kv_from_bundle(b);
    std::string out;
    for (std::size_t i = 0; i < doc.keys.size(); ++i) {
        out += doc.keys[i];
        out += " = ";
        out += doc.values[i];
        out += "\n";
    }
    return out;
}

// Replaces one key (the --set mechanism) and revalidates the whole bundle.
inline ConfigBundle apply_override(const ConfigBundle& base, const std::string& key,
                                   const std::string& value) {
    detail::KvDoc doc = kv_from_bundle(base);
    bool known = false;
    for (const auto& k : config_keys())
        if (k == key) {
            known = true;
            break;
        }
    if (!known) throw ParseError(ParseErrorCode::UNKNOWN_KEY, 0, "unknown key '" + key + "'");
    doc.set(key, value);
    return bundle_from_kv(doc);
}

}  // namespace driftcomp
