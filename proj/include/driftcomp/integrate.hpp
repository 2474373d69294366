#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "driftcomp/operators.hpp"

namespace driftcomp {

// Explicit step-size policy. The controller takes
//
//   dt = cfl_safety * min( dx^2 / (2 Dmax), dx / max(q, tiny), 1 / max(R, tiny) )
//
// with Dmax the worst effective face diffusivity over both species and R a
// bound on the reaction Jacobian scale. fixed_dt > 0 bypasses the controller
// (convergence studies).
struct StepControl {
    double cfl_safety = 0.4;
    double dt_max = 0.05;
    double dt_min = 1e-12;
    double t_end = 1.0;
    double nonneg_clip_tolerance = 1e-12;
    double fixed_dt = 0.0;

    bool operator==(const StepControl&) const = default;
};

namespace detail {

// Worst effective diffusivity over faces. For p < 2 the coefficient is
// largest where the gradient vanishes, and faces adjacent to the no-flux
// closures always see flat gradients, so the maximum is the flat-face
// ceiling d * [(1-k) + k * eps^((p-2)/2)]. Singular (eps = 0) reports +inf
// so the caller can turn it into a step-size underflow.
inline double max_effective_diffusivity(const DispersalSpec& sp) {
    if (sp.d == 0.0) return 0.0;
    if (sp.k == 0.0 || sp.p == 2.0) return sp.d;
    if (sp.epsilon <= 0.0) return std::numeric_limits<double>::infinity();
    const double alpha = std::pow(sp.epsilon, 0.5 * (sp.p - 2.0));
    return sp.d * ((1.0 - sp.k) + sp.k * alpha);
}

}  // namespace detail

// Largest stable explicit step at the given state (see StepControl).
// Throws DT_UNDERFLOW when the formula drops below dt_min, which signals a
// regularization too small for the grid.
inline double stable_dt(const State& state, const ModelConfig& cfg, const StepControl& ctl) {
    if (ctl.fixed_dt > 0.0) return std::min(ctl.fixed_dt, ctl.dt_max);

    const double d_max = std::max(detail::max_effective_diffusivity(cfg.disp_u),
                                  detail::max_effective_diffusivity(cfg.disp_v));

    const double tiny = 1e-30;
    const double dx = cfg.grid.dx();
    const double inf = std::numeric_limits<double>::infinity();

    const double dt_diff = d_max > 0.0 ? dx * dx / (2.0 * d_max) : inf;

    const double q = cfg.effective_drift();
    const double dt_adv = q > tiny ? dx / q : inf;

    double uv_max = 0.0;
    for (std::size_t i = 0; i < state.u.size(); ++i)
        uv_max = std::max(uv_max, state.u[i] + state.v[i]);
    const double rate = cfg.m_max_abs() + 2.0 * uv_max;
    const double dt_react = rate > tiny ? 1.0 / rate : inf;

    const double raw = ctl.cfl_safety * std::min({dt_diff, dt_adv, dt_react});
    if (raw < ctl.dt_min)
        throw SimulationError(SimErrorCode::DT_UNDERFLOW,
                              "stable step " + std::to_string(raw) + " fell below dt_min");
    return std::min(raw, ctl.dt_max);
}

// Stage-weighted source/boundary quadrature of one accepted RK4 step, in the
// stepper's own arithmetic: delta(mass) = dt * (reaction - boundary_net) up
// to roundoff and the nonnegativity clip.
struct StepBudget {
    double dt = 0.0;
    double reaction_u = 0.0;
    double reaction_v = 0.0;
    double boundary_net_u = 0.0;
    double boundary_net_v = 0.0;
};

struct StepInfo {
    long long step = 0;
    double t = 0.0;
    double dt = 0.0;
    double rhs_inf = 0.0;    // max |du/dt|, |dv/dt| sampled at the last stage
    double state_inf = 0.0;  // max over both fields
};

// Observers get read-only snapshots at a step cadence; returning a string
// halts the integration with that reason.
using Observer = std::function<std::optional<std::string>(const State&, const StepInfo&)>;

struct ObserverSlot {
    long long every = 1;
    Observer fn;
};

struct IntegrateOptions {
    std::vector<ObserverSlot> observers;
    // Times the integrator must land on exactly (t_end is always implied);
    // on_checkpoint fires whenever one is reached.
    std::vector<double> checkpoint_times;
    std::function<void(const State&)> on_checkpoint;
    bool audit_mass_budget = false;
    std::function<void(const StepBudget&, const State& before, const State& after)> on_budget;
    // Fault-injection hook used by the verification self-test: applied to the
    // rhs after stats are recorded, so a nonzero hook breaks the budget.
    std::function<void(const State&, std::span<double>, std::span<double>)> rhs_fault_injection;
    bool include_reaction = true;
};

struct IntegrateResult {
    State state;
    long long steps = 0;
    double min_dt = std::numeric_limits<double>::infinity();
    double max_dt = 0.0;
    double max_budget_residual_u = 0.0;
    double max_budget_residual_v = 0.0;
    std::optional<std::string> halt_reason;
};

namespace detail {

class Rk4Engine {
public:
    Rk4Engine(const ModelConfig& cfg, double clip_tol)
        : eval_(cfg),
          clip_tol_(clip_tol),
          n_(static_cast<std::size_t>(cfg.grid.n_cells)),
          k1u_(n_), k2u_(n_), k3u_(n_), k4u_(n_),
          k1v_(n_), k2v_(n_), k3v_(n_), k4v_(n_),
          tmp_{0.0, std::vector<double>(n_), std::vector<double>(n_)} {}

    RhsEvaluator& evaluator() { return eval_; }

    // Advances y in place; fills budget (stage-weighted) when given.
    void step(State& y, double dt, StepBudget* budget, double* rhs_inf_last,
              const std::function<void(const State&, std::span<double>, std::span<double>)>& fault) {
        RhsStats s1, s2, s3, s4;
        RhsStats* p1 = budget ? &s1 : nullptr;
        RhsStats* p2 = budget ? &s2 : nullptr;
        RhsStats* p3 = budget ? &s3 : nullptr;
        RhsStats* p4 = budget ? &s4 : nullptr;

        const double half_dt = 0.5 * dt;

        eval_.eval(y, k1u_, k1v_, p1);
        if (fault) fault(y, k1u_, k1v_);
        stage_state(y, half_dt, k1u_, k1v_);
        eval_.eval(tmp_, k2u_, k2v_, p2);
        if (fault) fault(tmp_, k2u_, k2v_);
        stage_state(y, half_dt, k2u_, k2v_);
        eval_.eval(tmp_, k3u_, k3v_, p3);
        if (fault) fault(tmp_, k3u_, k3v_);
        stage_state(y, dt, k3u_, k3v_);
        eval_.eval(tmp_, k4u_, k4v_, p4);
        if (fault) fault(tmp_, k4u_, k4v_);

        const double w = dt / 6.0;
        for (std::size_t i = 0; i < n_; ++i) {
            y.u[i] = y.u[i] + w * (k1u_[i] + 2.0 * k2u_[i] + 2.0 * k3u_[i] + k4u_[i]);
            y.v[i] = y.v[i] + w * (k1v_[i] + 2.0 * k2v_[i] + 2.0 * k3v_[i] + k4v_[i]);
        }
        clip_nonnegative(y);
        y.t += dt;

        if (budget) {
            budget->dt = dt;
            budget->reaction_u = combine(s1.reaction_u, s2.reaction_u, s3.reaction_u, s4.reaction_u);
            budget->reaction_v = combine(s1.reaction_v, s2.reaction_v, s3.reaction_v, s4.reaction_v);
            budget->boundary_net_u =
                combine(s1.boundary_net_u, s2.boundary_net_u, s3.boundary_net_u, s4.boundary_net_u);
            budget->boundary_net_v =
                combine(s1.boundary_net_v, s2.boundary_net_v, s3.boundary_net_v, s4.boundary_net_v);
        }
        if (rhs_inf_last) {
            double m = 0.0;
            for (std::size_t i = 0; i < n_; ++i) {
                m = std::max(m, std::abs(k4u_[i]));
                m = std::max(m, std::abs(k4v_[i]));
            }
            *rhs_inf_last = m;
        }
    }

    void clip_nonnegative(State& y) const {
        for (std::size_t i = 0; i < n_; ++i) {
            double& u = y.u[i];
            if (!(u >= 0.0)) {  // negative or NaN
                if (!(u >= -clip_tol_))
                    throw SimulationError(SimErrorCode::NEGATIVITY_BLOWUP,
                                          "u went below the clip tolerance; step too large");
                u = 0.0;
            }
            double& v = y.v[i];
            if (!(v >= 0.0)) {
                if (!(v >= -clip_tol_))
                    throw SimulationError(SimErrorCode::NEGATIVITY_BLOWUP,
                                          "v went below the clip tolerance; step too large");
                v = 0.0;
            }
        }
    }

private:
    static double combine(double a, double b, double c, double d) {
        return (a + 2.0 * b + 2.0 * c + d) / 6.0;
    }

    void stage_state(const State& y, double h, std::span<const double> ku,
                     std::span<const double> kv) {
        for (std::size_t i = 0; i < n_; ++i) {
            tmp_.u[i] = y.u[i] + h * ku[i];
            tmp_.v[i] = y.v[i] + h * kv[i];
        }
        tmp_.t = y.t;
    }

    RhsEvaluator eval_;
    double clip_tol_;
    std::size_t n_;
    std::vector<double> k1u_, k2u_, k3u_, k4u_;
    std::vector<double> k1v_, k2v_, k3v_, k4v_;
    State tmp_;
};

}  // namespace detail

// One classical RK4 step with nonnegativity clipping (one-shot; the
// integrate loop below reuses buffers instead).
inline State rk4_step(const State& state, double dt, const ModelConfig& cfg,
                      double clip_tolerance = 1e-12) {
    detail::Rk4Engine engine(cfg, clip_tolerance);
    State y = state;
    engine.step(y, dt, nullptr, nullptr, {});
    return y;
}

// Advances state0 until t >= ctl.t_end or an observer halts. The step
// sequence depends only on (state0, cfg, ctl, checkpoint_times); observers
// never influence it, so trajectories are bit-identical across cadences.
inline IntegrateResult integrate(State state0, const ModelConfig& cfg, const StepControl& ctl,
                                 IntegrateOptions opts = {}) {
    IntegrateResult res;
    res.state = std::move(state0);

    detail::Rk4Engine engine(cfg, ctl.nonneg_clip_tolerance);
    engine.evaluator().include_reaction = opts.include_reaction;

    const std::size_t n = res.state.u.size();

    auto state_inf = [&](const State& s) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            m = std::max({m, std::abs(s.u[i]), std::abs(s.v[i])});
        return m;
    };

    auto notify = [&](const StepInfo& info, bool force) -> bool {
        for (const auto& slot : opts.observers) {
            const bool due = force || (slot.every > 0 && info.step % slot.every == 0);
            if (!due) continue;
            if (auto reason = slot.fn(res.state, info)) {
                res.halt_reason = std::move(reason);
                return true;
            }
        }
        return false;
    };

    auto initial_rhs_inf = [&]() {
        std::vector<double> scratch_u(n), scratch_v(n);
        engine.evaluator().eval(res.state, scratch_u, scratch_v);
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            m = std::max({m, std::abs(scratch_u[i]), std::abs(scratch_v[i])});
        return m;
    };

    if (ctl.t_end <= res.state.t) {
        if (!opts.observers.empty()) {
            StepInfo info{0, res.state.t, 0.0, initial_rhs_inf(), state_inf(res.state)};
            notify(info, true);
        }
        if (opts.on_checkpoint) opts.on_checkpoint(res.state);
        return res;
    }

    // Initial observer call with the rhs at the starting state.
    if (!opts.observers.empty()) {
        StepInfo info{0, res.state.t, 0.0, initial_rhs_inf(), state_inf(res.state)};
        if (notify(info, true)) return res;
    }
    if (opts.on_checkpoint) {
        for (double t : opts.checkpoint_times)
            if (t == res.state.t) {
                opts.on_checkpoint(res.state);
                break;
            }
    }

    // Mandatory landing times: user checkpoints in (t0, t_end), then t_end.
    std::vector<double> marks;
    for (double t : opts.checkpoint_times)
        if (t > res.state.t && t < ctl.t_end) marks.push_back(t);
    std::sort(marks.begin(), marks.end());
    marks.erase(std::unique(marks.begin(), marks.end()), marks.end());
    marks.push_back(ctl.t_end);

    std::size_t next_mark = 0;
    State before;
    StepBudget budget;
    const bool audit = opts.audit_mass_budget || static_cast<bool>(opts.on_budget);

    while (res.state.t < ctl.t_end) {
        double dt = stable_dt(res.state, cfg, ctl);
        bool landed = false;
        while (next_mark < marks.size() && marks[next_mark] <= res.state.t) ++next_mark;
        if (next_mark < marks.size() && res.state.t + dt >= marks[next_mark]) {
            dt = marks[next_mark] - res.state.t;
            landed = true;
        }

        double rhs_inf = 0.0;
        if (audit) before = res.state;
        engine.step(res.state, dt, audit ? &budget : nullptr, &rhs_inf,
                    opts.rhs_fault_injection);
        if (landed) res.state.t = marks[next_mark];
        ++res.steps;
        res.min_dt = std::min(res.min_dt, dt);
        res.max_dt = std::max(res.max_dt, dt);

        if (audit) {
            const double dx = cfg.grid.dx();
            auto mass = [&](const std::vector<double>& f) {
                double s = 0.0;
                for (double x : f) s += x;
                return s * dx;
            };
            const double mu0 = mass(before.u), mu1 = mass(res.state.u);
            const double mv0 = mass(before.v), mv1 = mass(res.state.v);
            const double ru = (mu1 - mu0) - budget.dt * (budget.reaction_u - budget.boundary_net_u);
            const double rv = (mv1 - mv0) - budget.dt * (budget.reaction_v - budget.boundary_net_v);
            const double su = std::max({std::abs(mu0), std::abs(mu1), 1e-300});
            const double sv = std::max({std::abs(mv0), std::abs(mv1), 1e-300});
            res.max_budget_residual_u = std::max(res.max_budget_residual_u, std::abs(ru) / su);
            res.max_budget_residual_v = std::max(res.max_budget_residual_v, std::abs(rv) / sv);
            if (opts.on_budget) opts.on_budget(budget, before, res.state);
        }

        if (landed && opts.on_checkpoint && marks[next_mark] != ctl.t_end)
            opts.on_checkpoint(res.state);

        const bool final_step = res.state.t >= ctl.t_end;
        StepInfo info{res.steps, res.state.t, dt, rhs_inf, state_inf(res.state)};
        if (notify(info, final_step)) break;
    }

    if (opts.on_checkpoint && res.state.t >= ctl.t_end) opts.on_checkpoint(res.state);
    return res;
}

}  // namespace driftcomp
