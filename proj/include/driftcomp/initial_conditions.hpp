#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "driftcomp/model.hpp"

namespace driftcomp {

enum class IcFamily { GAUSSIAN_BUMP, STEP, CONSTANT, TWO_BUMPS, CUSTOM_TABLE };

inline const char* to_string(IcFamily f) {
    switch (f) {
        case IcFamily::GAUSSIAN_BUMP: return "gaussian_bump";
        case IcFamily::STEP: return "step";
        case IcFamily::CONSTANT: return "constant";
        case IcFamily::TWO_BUMPS: return "two_bumps";
        default: return "custom_table";
    }
}

inline std::optional<IcFamily> ic_family_from_string(const std::string& s) {
    if (s == "gaussian_bump") return IcFamily::GAUSSIAN_BUMP;
    if (s == "step") return IcFamily::STEP;
    if (s == "constant") return IcFamily::CONSTANT;
    if (s == "two_bumps") return IcFamily::TWO_BUMPS;
    if (s == "custom_table") return IcFamily::CUSTOM_TABLE;
    return std::nullopt;
}

// Parametrized initial-condition families sampled at cell centers. Fields
// must realize nonnegative and not identically zero (a zero-amplitude
// CONSTANT is the one sanctioned way to start a species at zero).
struct InitialConditionSpec {
    IcFamily family = IcFamily::CONSTANT;
    double amplitude = 0.0;
    double center = 0.0;
    double width = 0.0;
    double amplitude2 = 0.0;
    double center2 = 0.0;
    double width2 = 0.0;
    double left = 0.0;   // step plateau for x < edge
    double right = 0.0;  // step plateau for x >= edge
    double edge = 0.0;
    std::vector<double> table;

    bool operator==(const InitialConditionSpec&) const = default;

    static InitialConditionSpec gaussian(double amplitude, double center, double width) {
        InitialConditionSpec s;
        s.family = IcFamily::GAUSSIAN_BUMP;
        s.amplitude = amplitude;
        s.center = center;
        s.width = width;
        return s;
    }

    static InitialConditionSpec constant(double amplitude) {
        InitialConditionSpec s;
        s.family = IcFamily::CONSTANT;
        s.amplitude = amplitude;
        return s;
    }
};

inline std::vector<double> realize_ic(const InitialConditionSpec& spec, const Grid& grid) {
    const std::size_t n = static_cast<std::size_t>(grid.n_cells);
    std::vector<double> f(n, 0.0);

    auto fail = [](ConfigErrorCode code, const std::string& field, const std::string& msg) {
        throw ConfigError({{code, field, msg}});
    };

    switch (spec.family) {
        case IcFamily::CONSTANT:
            if (spec.amplitude < 0)
                fail(ConfigErrorCode::NONPOSITIVE_IC, "amplitude", "constant level is negative");
            std::fill(f.begin(), f.end(), spec.amplitude);
            return f;

        case IcFamily::GAUSSIAN_BUMP: {
            if (!(spec.width > 0))
                fail(ConfigErrorCode::INVALID_IC_PARAMETER, "width", "bump width must be positive");
            const double s2 = 2.0 * spec.width * spec.width;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = grid.cell_center(static_cast<int>(i)) - spec.center;
                f[i] = spec.amplitude * std::exp(-x * x / s2);
            }
            break;
        }

        case IcFamily::TWO_BUMPS: {
            if (!(spec.width > 0) || !(spec.width2 > 0))
                fail(ConfigErrorCode::INVALID_IC_PARAMETER, "width", "bump widths must be positive");
            const double s2a = 2.0 * spec.width * spec.width;
            const double s2b = 2.0 * spec.width2 * spec.width2;
            for (std::size_t i = 0; i < n; ++i) {
                const double x = grid.cell_center(static_cast<int>(i));
                const double a = x - spec.center;
                const double b = x - spec.center2;
                f[i] = spec.amplitude * std::exp(-a * a / s2a) +
                       spec.amplitude2 * std::exp(-b * b / s2b);
            }
            break;
        }

        case IcFamily::STEP:
            for (std::size_t i = 0; i < n; ++i)
                f[i] = grid.cell_center(static_cast<int>(i)) < spec.edge ? spec.left : spec.right;
            break;

        case IcFamily::CUSTOM_TABLE:
            if (spec.table.size() != n)
                fail(ConfigErrorCode::IC_TABLE_SIZE_MISMATCH, "table",
                     "table has " + std::to_string(spec.table.size()) + " entries, grid has " +
                         std::to_string(n) + " cells");
            f = spec.table;
            break;
    }

    bool any_positive = false;
    for (double x : f) {
        if (x < 0)
            fail(ConfigErrorCode::NONPOSITIVE_IC, "field", "realized field has negative values");
        if (x > 0) any_positive = true;
    }
    if (!any_positive)
        fail(ConfigErrorCode::NONPOSITIVE_IC, "field",
             "realized field is identically zero (use a zero-amplitude constant instead)");
    return f;
}

}  // namespace driftcomp
