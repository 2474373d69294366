#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "driftcomp/integrate.hpp"
#include "driftcomp/model.hpp"

// Independent reference implementations used by tests and by `verify`: a
// dense loop-structured rhs (no shared flux arrays), a separately coded RK4
// stage loop, a fine-step forward-Euler integrator, the closed-form
// homogeneous logistic solution, and the comparison-ODE solver.

namespace driftcomp {

enum class OracleScheme { EULER_FINE, RK4_INDEPENDENT };

struct OracleRun {
    OracleScheme scheme = OracleScheme::EULER_FINE;
    double dt_fixed = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> u_frames;
    std::vector<std::vector<double>> v_frames;

    const std::vector<double>& final_u() const { return u_frames.back(); }
    const std::vector<double>& final_v() const { return v_frames.back(); }
};

namespace oracle {

// Dense per-cell rhs written as straight-line code: for each cell, both
// face transports are expanded inline instead of assembling flux arrays.
// The regularized coefficient goes through std::pow directly.
inline void dense_rhs(const State& s, const ModelConfig& cfg, std::span<double> du,
                      std::span<double> dv) {
    const int n = cfg.grid.n_cells;
    const double dx = cfg.grid.dx();
    const double q = cfg.effective_drift();

    auto coeff = [](double g, const DispersalSpec& sp) {
        if (sp.k == 0.0) return sp.d;
        double alpha;
        if (sp.p == 2.0) {
            alpha = 1.0;
        } else {
            const double arg = g * g + sp.epsilon;
            if (arg <= 0.0)
                throw SimulationError(SimErrorCode::SINGULAR_COEFFICIENT,
                                      "flat gradient with zero regularization");
            alpha = std::pow(arg, (sp.p - 2.0) / 2.0);
        }
        return sp.d * ((1.0 - sp.k) + sp.k * alpha);
    };

    auto cell_rhs = [&](std::span<const double> c, const DispersalSpec& sp, int i) {
        // Left face transport (rightward positive).
        double f_left;
        if (i == 0) {
            f_left = 0.0;
        } else {
            const double g = (c[static_cast<std::size_t>(i)] - c[static_cast<std::size_t>(i - 1)]) / dx;
            f_left = q * c[static_cast<std::size_t>(i - 1)] - coeff(g, sp) * g;
        }
        double f_right;
        if (i == n - 1) {
            f_right = cfg.drift_enabled ? q * c[static_cast<std::size_t>(n - 1)] : 0.0;
        } else {
            const double g = (c[static_cast<std::size_t>(i + 1)] - c[static_cast<std::size_t>(i)]) / dx;
            f_right = q * c[static_cast<std::size_t>(i)] - coeff(g, sp) * g;
        }
        return (f_left - f_right) / dx;
    };

    for (int i = 0; i < n; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        const double growth = cfg.m_at(i) - s.u[si] - s.v[si];
        du[si] = cell_rhs(s.u, cfg.disp_u, i) + s.u[si] * growth;
        dv[si] = cell_rhs(s.v, cfg.disp_v, i) + s.v[si] * growth;
    }
}

}  // namespace oracle

// RK4 written as its own stage loop over the shared semi-discrete rhs; used
// to pin down the production stepper bit-for-bit.
inline State rk4_step_independent(const State& state, double dt, const ModelConfig& cfg,
                                  double clip_tolerance = 1e-12) {
    const std::size_t n = state.u.size();
    RhsEvaluator eval(cfg);

    std::vector<std::vector<double>> ku(4, std::vector<double>(n));
    std::vector<std::vector<double>> kv(4, std::vector<double>(n));
    State work = state;

    const double half_dt = 0.5 * dt;
    const double stage_h[3] = {half_dt, half_dt, dt};

    eval.eval(work, ku[0], kv[0]);
    for (int s = 1; s < 4; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            work.u[i] = state.u[i] + stage_h[s - 1] * ku[s - 1][i];
            work.v[i] = state.v[i] + stage_h[s - 1] * kv[s - 1][i];
        }
        eval.eval(work, ku[static_cast<std::size_t>(s)], kv[static_cast<std::size_t>(s)]);
    }

    State out = state;
    const double w = dt / 6.0;
    for (std::size_t i = 0; i < n; ++i) {
        out.u[i] = state.u[i] + w * (ku[0][i] + 2.0 * ku[1][i] + 2.0 * ku[2][i] + ku[3][i]);
        out.v[i] = state.v[i] + w * (kv[0][i] + 2.0 * kv[1][i] + 2.0 * kv[2][i] + kv[3][i]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!(out.u[i] >= 0.0)) {
            if (!(out.u[i] >= -clip_tolerance))
                throw SimulationError(SimErrorCode::NEGATIVITY_BLOWUP, "oracle step went negative");
            out.u[i] = 0.0;
        }
        if (!(out.v[i] >= 0.0)) {
            if (!(out.v[i] >= -clip_tolerance))
                throw SimulationError(SimErrorCode::NEGATIVITY_BLOWUP, "oracle step went negative");
            out.v[i] = 0.0;
        }
    }
    out.t = state.t + dt;
    return out;
}

// Fixed-step forward Euler over the dense rhs. Stores every `store_every`-th
// frame plus the endpoint. dt_fixed must be well below the explicit
// stability limit; callers derive it from the main controller.
inline OracleRun euler_fine_run(const ModelConfig& cfg, const State& ic, double t_end,
                                double dt_fixed, long long store_every = 0) {
    const std::size_t n = ic.u.size();
    OracleRun run;
    run.scheme = OracleScheme::EULER_FINE;
    run.dt_fixed = dt_fixed;

    State y = ic;
    std::vector<double> du(n), dv(n);

    const long long total = t_end > y.t ? static_cast<long long>(std::ceil((t_end - y.t) / dt_fixed)) : 0;
    if (store_every <= 0) store_every = std::max<long long>(1, total / 200);

    auto store = [&]() {
        run.times.push_back(y.t);
        run.u_frames.push_back(y.u);
        run.v_frames.push_back(y.v);
    };
    store();

    for (long long step = 1; step <= total; ++step) {
        double dt = dt_fixed;
        if (y.t + dt > t_end) dt = t_end - y.t;
        if (dt <= 0.0) break;
        oracle::dense_rhs(y, cfg, du, dv);
        for (std::size_t i = 0; i < n; ++i) {
            y.u[i] += dt * du[i];
            y.v[i] += dt * dv[i];
            if (y.u[i] < 0.0) y.u[i] = 0.0;
            if (y.v[i] < 0.0) y.v[i] = 0.0;
        }
        y.t += dt;
        if (step % store_every == 0 || step == total) store();
    }
    if (run.times.back() != y.t) store();
    return run;
}

// Closed-form total density of the homogeneous logistic problem
// s' = s (m - s): s(t) = m / (1 + ((m - s0)/s0) e^{-m t}).
inline double logistic_total(double m, double s0, double t) {
    if (s0 == 0.0) return 0.0;
    return m / (1.0 + (m - s0) / s0 * std::exp(-m * t));
}

struct ComparisonOdeSolution {
    std::vector<double> t;
    std::vector<double> y;
    double equilibrium = 0.0;  // positive root of C1 + C2 y - C3 y^(1+1/q)

    double at(double time) const {
        // Linear interpolation over the dense grid.
        if (time <= t.front()) return y.front();
        if (time >= t.back()) return y.back();
        auto it = std::lower_bound(t.begin(), t.end(), time);
        const std::size_t hi = static_cast<std::size_t>(it - t.begin());
        const std::size_t lo = hi - 1;
        const double w = (time - t[lo]) / (t[hi] - t[lo]);
        return y[lo] + w * (y[hi] - y[lo]);
    }
};

// Dense fine-step RK4 solve of Y' = C1 + C2 Y - C3 Y^(1+1/q) plus the
// bisected positive equilibrium root.
inline ComparisonOdeSolution comparison_ode_solve(double c1, double c2, double c3, double q,
                                                  double y0, double t_end, double dt = 1e-4) {
    ComparisonOdeSolution sol;
    const double expo = 1.0 + 1.0 / q;
    auto f = [&](double y) {
        const double yc = y > 0.0 ? y : 0.0;
        return c1 + c2 * yc - c3 * std::pow(yc, expo);
    };

    // Equilibrium by bisection: f(0) = C1 >= 0 and the sink dominates for
    // large y, so a sign change is bracketable by doubling.
    double lo = 0.0, hi = 1.0;
    while (f(hi) > 0.0 && hi < 1e100) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    sol.equilibrium = 0.5 * (lo + hi);

    double y = y0;
    double t = 0.0;
    sol.t.push_back(t);
    sol.y.push_back(y);
    const long long total = static_cast<long long>(std::ceil(t_end / dt));
    for (long long s = 0; s < total; ++s) {
        double h = dt;
        if (t + h > t_end) h = t_end - t;
        if (h <= 0.0) break;
        const double k1 = f(y);
        const double k2 = f(y + 0.5 * h * k1);
        const double k3 = f(y + 0.5 * h * k2);
        const double k4 = f(y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += h;
        sol.t.push_back(t);
        sol.y.push_back(y);
    }
    return sol;
}

}  // namespace driftcomp
