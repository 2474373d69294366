#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "driftcomp/grid.hpp"

namespace driftcomp {

// Per-species dispersal law. The diffusive face flux is
//
//   d * [ (1-k) + k * (g^2 + epsilon)^((p-2)/2) ] * g,     g = face gradient,
//
// i.e. a fraction (1-k) of the population moves by linear diffusion and a
// fraction k by regularized p-Laplacian ("fast") diffusion. p = 2 or k = 0
// reduce exactly to linear diffusion with coefficient d.
struct DispersalSpec {
    double d = 0.3;
    double k = 0.0;
    double p = 2.0;
    double epsilon = 1e-4;

    bool operator==(const DispersalSpec&) const = default;
};

// Full problem definition for the two-species competition system
//
//   u_t = div(diffusive flux of u) - div(q u) + u (m - u - v)
//   v_t = div(diffusive flux of v) - div(q v) + v (m - u - v)
//
// on [0, length]. With drift enabled the upstream boundary (x = 0) carries a
// zero total-flux (Danckwerts) closure and the downstream boundary carries
// zero diffusive flux with free advective outflow. With drift disabled both
// boundaries are no-flux and the advection term is dropped entirely.
struct ModelConfig {
    Grid grid;
    DispersalSpec disp_u;
    DispersalSpec disp_v;
    double drift_q = 0.0;
    std::vector<double> resource_m{1.0};  // size 1 (broadcast) or n_cells
    bool drift_enabled = false;

    double effective_drift() const { return drift_enabled ? drift_q : 0.0; }

    double m_at(int cell) const {
        return resource_m.size() == 1 ? resource_m[0]
                                      : resource_m[static_cast<std::size_t>(cell)];
    }

    double m_mean() const {
        double s = 0;
        for (double x : resource_m) s += x;
        return s / static_cast<double>(resource_m.size());
    }

    double m_max_abs() const {
        double s = 0;
        for (double x : resource_m) s = std::max(s, std::abs(x));
        return s;
    }

    bool operator==(const ModelConfig&) const = default;
};

// Paired nonnegative density fields at a simulation time.
struct State {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;
};

enum class Verdict { U_WINS, V_WINS, COEXIST, UNDECIDED };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::U_WINS: return "U_WINS";
        case Verdict::V_WINS: return "V_WINS";
        case Verdict::COEXIST: return "COEXIST";
        default: return "UNDECIDED";
    }
}

inline std::optional<Verdict> verdict_from_string(const std::string& s) {
    if (s == "U_WINS") return Verdict::U_WINS;
    if (s == "V_WINS") return Verdict::V_WINS;
    if (s == "COEXIST") return Verdict::COEXIST;
    if (s == "UNDECIDED") return Verdict::UNDECIDED;
    return std::nullopt;
}

// Classified long-run result with the norms that support the call.
struct Outcome {
    Verdict verdict = Verdict::UNDECIDED;
    double t_final = 0.0;
    double u_sup = 0.0;
    double v_sup = 0.0;
    double v_l2 = 0.0;
    std::optional<double> extinction_time;
};

// ---------------------------------------------------------------------------
// Validation

enum class ConfigErrorCode {
    P_OUT_OF_RANGE,
    K_OUT_OF_RANGE,
    NEGATIVE_COEFFICIENT,
    GRID_TOO_SMALL,
    RESOURCE_NOT_FINITE,
    RESOURCE_SIZE_MISMATCH,
    NONPOSITIVE_IC,
    INVALID_IC_PARAMETER,
    IC_TABLE_SIZE_MISMATCH,
    STEP_CONTROL_INVALID,
    THRESHOLDS_INVALID,
};

inline const char* to_string(ConfigErrorCode c) {
    switch (c) {
        case ConfigErrorCode::P_OUT_OF_RANGE: return "P_OUT_OF_RANGE";
        case ConfigErrorCode::K_OUT_OF_RANGE: return "K_OUT_OF_RANGE";
        case ConfigErrorCode::NEGATIVE_COEFFICIENT: return "NEGATIVE_COEFFICIENT";
        case ConfigErrorCode::GRID_TOO_SMALL: return "GRID_TOO_SMALL";
        case ConfigErrorCode::RESOURCE_NOT_FINITE: return "RESOURCE_NOT_FINITE";
        case ConfigErrorCode::RESOURCE_SIZE_MISMATCH: return "RESOURCE_SIZE_MISMATCH";
        case ConfigErrorCode::NONPOSITIVE_IC: return "NONPOSITIVE_IC";
        case ConfigErrorCode::INVALID_IC_PARAMETER: return "INVALID_IC_PARAMETER";
        case ConfigErrorCode::IC_TABLE_SIZE_MISMATCH: return "IC_TABLE_SIZE_MISMATCH";
        case ConfigErrorCode::STEP_CONTROL_INVALID: return "STEP_CONTROL_INVALID";
        default: return "THRESHOLDS_INVALID";
    }
}

struct ConfigIssue {
    ConfigErrorCode code;
    std::string field;
    std::string message;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues)
        : std::runtime_error(render(issues)), issues_(std::move(issues)) {}

    const std::vector<ConfigIssue>& issues() const { return issues_; }

private:
    static std::string render(const std::vector<ConfigIssue>& issues) {
        std::string s = "invalid configuration:";
        for (const auto& i : issues) {
            s += "\n  ";
            s += to_string(i.code);
            s += " [" + i.field + "]: " + i.message;
        }
        return s;
    }

    std::vector<ConfigIssue> issues_;
};

// Returns the complete list of invariant violations; empty means valid.
inline std::vector<ConfigIssue> validate_config(const ModelConfig& cfg) {
    std::vector<ConfigIssue> out;
    auto add = [&](ConfigErrorCode c, std::string field, std::string msg) {
        out.push_back({c, std::move(field), std::move(msg)});
    };

    if (!(cfg.grid.length > 0) || !std::isfinite(cfg.grid.length))
        add(ConfigErrorCode::NEGATIVE_COEFFICIENT, "length", "domain length must be positive");
    if (cfg.grid.n_cells < 4)
        add(ConfigErrorCode::GRID_TOO_SMALL, "n_cells",
            "need at least 4 cells (two interior faces per flux stencil)");

    auto check_species = [&](const DispersalSpec& sp, const std::string& tag) {
        if (!(sp.p > 1.0 && sp.p <= 2.0))
            add(ConfigErrorCode::P_OUT_OF_RANGE, "p_" + tag,
                "exponent p must lie in (1, 2], got " + std::to_string(sp.p));
        if (!(sp.k >= 0.0 && sp.k <= 1.0))
            add(ConfigErrorCode::K_OUT_OF_RANGE, "k_" + tag,
                "fast fraction k must lie in [0, 1], got " + std::to_string(sp.k));
        if (!(sp.d >= 0.0) || !std::isfinite(sp.d))
            add(ConfigErrorCode::NEGATIVE_COEFFICIENT, "d_" + tag,
                "diffusivity must be nonnegative");
        if (!(sp.epsilon >= 0.0) || !std::isfinite(sp.epsilon))
            add(ConfigErrorCode::NEGATIVE_COEFFICIENT, "epsilon",
                "regularization must be nonnegative");
    };
    check_species(cfg.disp_u, "u");
    check_species(cfg.disp_v, "v");

    if (cfg.drift_enabled && (!(cfg.drift_q >= 0.0) || !std::isfinite(cfg.drift_q)))
        add(ConfigErrorCode::NEGATIVE_COEFFICIENT, "drift_q",
            "drift speed must be nonnegative");

    if (cfg.resource_m.empty() ||
        (cfg.resource_m.size() != 1 &&
         cfg.resource_m.size() != static_cast<std::size_t>(std::max(cfg.grid.n_cells, 0))))
        add(ConfigErrorCode::RESOURCE_SIZE_MISMATCH, "m",
            "resource must be a scalar or one value per cell");
    for (double x : cfg.resource_m)
        if (!std::isfinite(x)) {
            add(ConfigErrorCode::RESOURCE_NOT_FINITE, "m", "resource values must be finite");
            break;
        }

    return out;
}

// Throwing convenience wrapper around validate_config.
inline ModelConfig validated(ModelConfig cfg) {
    auto issues = validate_config(cfg);
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return cfg;
}

// ---------------------------------------------------------------------------
// Runtime (numerical) failures

enum class SimErrorCode {
    SINGULAR_COEFFICIENT,
    DT_UNDERFLOW,
    NEGATIVITY_BLOWUP,
    CONSTANTS_INFEASIBLE,
};

inline const char* to_string(SimErrorCode c) {
    switch (c) {
        case SimErrorCode::SINGULAR_COEFFICIENT: return "SINGULAR_COEFFICIENT";
        case SimErrorCode::DT_UNDERFLOW: return "DT_UNDERFLOW";
        case SimErrorCode::NEGATIVITY_BLOWUP: return "NEGATIVITY_BLOWUP";
        default: return "CONSTANTS_INFEASIBLE";
    }
}

class SimulationError : public std::runtime_error {
public:
    SimulationError(SimErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    SimErrorCode code() const { return code_; }

private:
    SimErrorCode code_;
};

}  // namespace driftcomp
