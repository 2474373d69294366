#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "driftcomp/integrate.hpp"
#include "driftcomp/model.hpp"

namespace driftcomp {

// Lebesgue norm (sum_i f_i^q dx)^(1/q) of a nonnegative cell field;
// q = infinity returns the maximum.
inline double lq_norm(std::span<const double> field, const Grid& grid, double q) {
    if (std::isinf(q)) {
        double m = 0.0;
        for (double x : field) m = std::max(m, x);
        return m;
    }
    const double dx = grid.dx();
    double s = 0.0;
    if (q == 1.0) {
        for (double x : field) s += x;
        return s * dx;
    }
    if (q == 2.0) {
        for (double x : field) s += x * x;
        return std::sqrt(s * dx);
    }
    for (double x : field) s += std::pow(x, q);
    return std::pow(s * dx, 1.0 / q);
}

inline double sup_norm(std::span<const double> field) {
    double m = 0.0;
    for (double x : field) m = std::max(m, std::abs(x));
    return m;
}

struct NormReport {
    double t = 0.0;
    double u_l1 = 0.0, u_l2 = 0.0, u_sup = 0.0;
    double v_l1 = 0.0, v_l2 = 0.0, v_sup = 0.0;
    std::map<double, double> v_lq;  // extra requested exponents
};

inline NormReport compute_norms(const State& s, const Grid& grid,
                                std::span<const double> extra_q = {}) {
    NormReport r;
    r.t = s.t;
    r.u_l1 = lq_norm(s.u, grid, 1.0);
    r.u_l2 = lq_norm(s.u, grid, 2.0);
    r.u_sup = sup_norm(s.u);
    r.v_l1 = lq_norm(s.v, grid, 1.0);
    r.v_l2 = lq_norm(s.v, grid, 2.0);
    r.v_sup = sup_norm(s.v);
    for (double q : extra_q) r.v_lq[q] = lq_norm(s.v, grid, q);
    return r;
}

// Exclusion/survival/extinction levels used by outcome classification; the
// defaults scale with the mean resource level.
struct DiagnosticsThresholds {
    double exclusion = 1e-3;
    double survival = 1e-1;
    double extinction = 1e-3;

    bool operator==(const DiagnosticsThresholds&) const = default;

    static DiagnosticsThresholds defaults_for(double m_mean) {
        return {1e-3 * m_mean, 1e-1 * m_mean, 1e-3};
    }
};

// Long-run verdict from sup norms: a species is excluded below `exclusion`
// and established above `survival`. Meaningful once the caller has reached
// (or is near) a steady state; otherwise expect UNDECIDED.
inline Outcome classify_outcome(const State& s, const Grid& grid, double exclusion,
                                double survival) {
    Outcome out;
    out.t_final = s.t;
    out.u_sup = sup_norm(s.u);
    out.v_sup = sup_norm(s.v);
    out.v_l2 = lq_norm(s.v, grid, 2.0);
    if (out.v_sup < exclusion && out.u_sup > survival)
        out.verdict = Verdict::U_WINS;
    else if (out.u_sup < exclusion && out.v_sup > survival)
        out.verdict = Verdict::V_WINS;
    else if (out.u_sup > survival && out.v_sup > survival)
        out.verdict = Verdict::COEXIST;
    else
        out.verdict = Verdict::UNDECIDED;
    return out;
}

// One residual sample for steady-state detection.
struct ResidualSample {
    double rhs_inf = 0.0;
    double state_inf = 0.0;
};

// True iff the scaled residual stayed below tol across the whole window.
inline bool steady_state_detector(std::span<const ResidualSample> window, double tol) {
    if (window.empty()) return false;
    for (const auto& s : window)
        if (!(s.rhs_inf / std::max(s.state_inf, 1.0) < tol)) return false;
    return true;
}

// Earliest time the series drops below `threshold`, provided the series is
// non-increasing around the crossing (a momentary dip that rebounds is a
// transient, not extinction).
inline std::optional<double> extinction_detector(
    std::span<const std::pair<double, double>> series, double threshold) {
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!(series[i].second < threshold)) continue;
        bool monotone = true;
        const std::size_t lo = i >= 3 ? i - 3 : 0;
        const std::size_t hi = std::min(i + 1, series.size() - 1);
        for (std::size_t j = lo; j < hi; ++j) {
            if (series[j + 1].second > series[j].second * (1.0 + 1e-9) + 1e-300) {
                monotone = false;
                break;
            }
        }
        if (monotone) return series[i].first;
    }
    return std::nullopt;
}

// Comparison-ODE machinery. The envelope solves
//
//   Y' = C1 + C2 Y - C3 Y^(1 + 1/q),    Y(0) = y0,
//
// whose superlinear sink keeps Y bounded for any positive constants.
struct BoundCheckConfig {
    double lebesgue_q = 2.0;
    double ode_c1 = 1.0;
    double ode_c2 = 1.0;
    double ode_c3 = 1.0;
    double alpha = 0.5;  // extinction exponent, in (0, 1)
};

struct BoundViolation {
    double t = 0.0;
    double measured = 0.0;
    double bound = 0.0;
};

struct BoundCheckReport {
    std::vector<BoundViolation> violations;
    std::size_t samples = 0;
    double max_excess = 0.0;  // max of measured/bound - 1 over all samples
};

// Checks a measured series of (t, ||v||_q) against the comparison-ODE
// envelope for Y = ||v||_q^q started from y0. A sample violates when the
// measured q-th power exceeds Y(t) * (1 + tolerance).
inline BoundCheckReport lq_bound_check(std::span<const std::pair<double, double>> series,
                                       const BoundCheckConfig& cfg, double y0,
                                       double tolerance) {
    BoundCheckReport report;
    report.samples = series.size();
    if (series.empty()) return report;

    const double expo = 1.0 + 1.0 / cfg.lebesgue_q;
    auto f = [&](double y) {
        const double yc = std::max(y, 0.0);
        return cfg.ode_c1 + cfg.ode_c2 * yc - cfg.ode_c3 * std::pow(yc, expo);
    };

    // Dense fixed-step RK4 between consecutive sample times.
    double y = y0;
    double t = series[0].first;
    for (const auto& [ts, measured_norm] : series) {
        const double span_t = ts - t;
        if (span_t > 0.0) {
            const int substeps = std::max(16, static_cast<int>(std::ceil(span_t / 1e-3)));
            const double h = span_t / substeps;
            for (int s = 0; s < substeps; ++s) {
                const double k1 = f(y);
                const double k2 = f(y + 0.5 * h * k1);
                const double k3 = f(y + 0.5 * h * k2);
                const double k4 = f(y + h * k3);
                y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                if (!std::isfinite(y) || y > 1e150)
                    throw SimulationError(SimErrorCode::CONSTANTS_INFEASIBLE,
                                          "comparison envelope overflowed");
            }
            t = ts;
        }
        const double measured = std::pow(std::max(measured_norm, 0.0), cfg.lebesgue_q);
        const double bound = y;
        if (bound > 0.0)
            report.max_excess = std::max(report.max_excess, measured / bound - 1.0);
        else if (measured > 0.0)
            report.max_excess = std::numeric_limits<double>::infinity();
        if (measured > bound * (1.0 + tolerance))
            report.violations.push_back({ts, measured, bound});
    }
    return report;
}

struct FteCheckReport {
    std::size_t satisfied = 0;
    std::size_t total = 0;
    double fraction = 1.0;
};

// Checks the discrete difference quotient of Y = ||v||_2 against
// Y' <= C3 + M Y - Ctilde Y^alpha at every sample, within `slack`.
inline FteCheckReport fte_inequality_check(std::span<const std::pair<double, double>> series,
                                           double M, double C3, double Ctilde, double alpha,
                                           double slack = 1e-9) {
    FteCheckReport r;
    if (series.size() < 2) return r;
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
        const double dt = series[i + 1].first - series[i].first;
        if (dt <= 0.0) continue;
        const double y = series[i].second;
        const double quotient = (series[i + 1].second - y) / dt;
        const double rhs = C3 + M * y - Ctilde * std::pow(std::max(y, 0.0), alpha);
        ++r.total;
        if (quotient <= rhs + slack) ++r.satisfied;
    }
    r.fraction = r.total == 0 ? 1.0 : static_cast<double>(r.satisfied) / static_cast<double>(r.total);
    return r;
}

// Mass-budget residual of one accepted step, relative to the larger of the
// masses before/after. The quadrature comes from the stepper itself
// (StepBudget), so the residual measures only roundoff and the clip.
inline std::pair<double, double> mass_budget_residual(const State& before, const State& after,
                                                      const StepBudget& budget,
                                                      const Grid& grid) {
    const double dx = grid.dx();
    auto mass = [&](const std::vector<double>& f) {
        double s = 0.0;
        for (double x : f) s += x;
        return s * dx;
    };
    const double mu0 = mass(before.u), mu1 = mass(after.u);
    const double mv0 = mass(before.v), mv1 = mass(after.v);
    const double ru = (mu1 - mu0) - budget.dt * (budget.reaction_u - budget.boundary_net_u);
    const double rv = (mv1 - mv0) - budget.dt * (budget.reaction_v - budget.boundary_net_v);
    auto rel = [](double r, double a, double b) {
        if (r == 0.0) return 0.0;
        return std::abs(r) / std::max({std::abs(a), std::abs(b), 1e-300});
    };
    return {rel(ru, mu0, mu1), rel(rv, mv0, mv1)};
}

}  // namespace driftcomp
