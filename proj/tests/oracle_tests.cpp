#include <doctest.h>

#include <cmath>
#include <random>

#include "driftcomp/integrate.hpp"
#include "driftcomp/oracle.hpp"

using namespace driftcomp;

namespace {

ModelConfig fast_cfg(int n, bool drift) {
    ModelConfig cfg;
    cfg.grid = {1.0, n};
    cfg.disp_u = {0.2, 0.0, 2.0, 1e-4};
    cfg.disp_v = {0.3, 1.0, 1.75, 1e-4};
    cfg.drift_q = drift ? 0.5 : 0.0;
    cfg.drift_enabled = drift;
    cfg.resource_m = {1.0};
    return cfg;
}

State bump_state(const Grid& g) {
    State s;
    s.u.resize(static_cast<std::size_t>(g.n_cells));
    s.v.resize(static_cast<std::size_t>(g.n_cells));
    for (int i = 0; i < g.n_cells; ++i) {
        const double x = g.cell_center(i);
        s.u[static_cast<std::size_t>(i)] = 0.5 * std::exp(-50.0 * (x - 0.3) * (x - 0.3));
        s.v[static_cast<std::size_t>(i)] = 0.5 * std::exp(-50.0 * (x - 0.7) * (x - 0.7));
    }
    return s;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("logistic closed form") {
    CHECK(logistic_total(1.0, 0.2, 0.0) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(logistic_total(1.0, 0.2, 50.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(logistic_total(1.0, 0.0, 5.0) == 0.0);
    // Midpoint sanity: s(ln 4) with s0 = 0.2 (m - s0)/s0 = 4 -> s = 0.5.
    CHECK(logistic_total(1.0, 0.2, std::log(4.0)) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("fine euler matches the logistic closed form to O(dt)") {
    ModelConfig cfg = fast_cfg(8, false);
    cfg.disp_u.d = 0.0;
    cfg.disp_v = {0.0, 0.0, 2.0, 1e-4};
    State s;
    s.u.assign(8, 0.1);
    s.v.assign(8, 0.1);
    const OracleRun run = euler_fine_run(cfg, s, 1.0, 1e-4);
    const double exact = logistic_total(1.0, 0.2, 1.0);
    const double total = run.final_u()[0] + run.final_v()[0];
    CHECK(std::abs(total - exact) < 5e-4);
    CHECK(run.times.back() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero state stays zero under the fine euler oracle") {
    ModelConfig cfg = fast_cfg(8, true);
    State s;
    s.u.assign(8, 0.0);
    s.v.assign(8, 0.0);
    const OracleRun run = euler_fine_run(cfg, s, 0.5, 1e-3);
    for (double x : run.final_u()) CHECK(x == 0.0);
    for (double x : run.final_v()) CHECK(x == 0.0);
}

TEST_CASE("fine euler endpoint tracks the main adaptive integrator") {
    ModelConfig cfg = fast_cfg(16, true);
    State s0 = bump_state(cfg.grid);

    StepControl ctl;
    ctl.t_end = 0.5;
    const IntegrateResult main_run = integrate(s0, cfg, ctl);

    const double dt_fixed = std::min(main_run.min_dt, stable_dt(s0, cfg, ctl)) / 10.0;
    const OracleRun euler = euler_fine_run(cfg, s0, ctl.t_end, dt_fixed);

    auto rel_l2 = [](const std::vector<double>& a, const std::vector<double>& b) {
        double num = 0, den = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            num += (a[i] - b[i]) * (a[i] - b[i]);
            den += std::max(a[i] * a[i], b[i] * b[i]);
        }
        return std::sqrt(num / std::max(den, 1e-30));
    };
    CHECK(rel_l2(main_run.state.u, euler.final_u()) < 0.02);
    CHECK(rel_l2(main_run.state.v, euler.final_v()) < 0.02);
}

TEST_CASE("comparison ode degenerate and generic behavior") {
    SUBCASE("no source, zero start stays at zero") {
        const auto sol = comparison_ode_solve(0.0, 1.0, 1.0, 2.0, 0.0, 5.0);
        for (double y : sol.y) CHECK(y == 0.0);
        // The positive equilibrium of y - y^(3/2) sits at 1 even though the
        // trajectory from 0 never leaves the origin.
        CHECK(sol.equilibrium == doctest::Approx(1.0).epsilon(1e-10));
    }

    SUBCASE("rising from below the equilibrium, monotone, no overshoot") {
        const auto sol = comparison_ode_solve(1.0, 1.0, 1.0, 2.0, 0.0, 40.0);
        for (std::size_t i = 1; i < sol.y.size(); ++i) {
            CHECK(sol.y[i] >= sol.y[i - 1] - 1e-12);
            CHECK(sol.y[i] <= sol.equilibrium * (1.0 + 1e-9));
        }
    }

    SUBCASE("decaying from above the equilibrium, monotone") {
        const auto sol = comparison_ode_solve(1.0, 1.0, 1.0, 2.0, 50.0, 40.0);
        for (std::size_t i = 1; i < sol.y.size(); ++i)
            CHECK(sol.y[i] <= sol.y[i - 1] + 1e-12);
        CHECK(sol.y.back() == doctest::Approx(sol.equilibrium).epsilon(1e-6));
    }
}

TEST_CASE("dense interpolation of the ode solution") {
    const auto sol = comparison_ode_solve(1.0, 1.0, 1.0, 2.0, 0.0, 10.0);
    CHECK(sol.at(-1.0) == sol.y.front());
    CHECK(sol.at(100.0) == sol.y.back());
    const double mid = sol.at(5.00005);
    CHECK(mid >= sol.at(5.0) - 1e-12);
    CHECK(mid <= sol.at(5.0001) + 1e-12);
}

TEST_CASE("independent rk4 equals the production stepper bitwise") {
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> unit(0.0, 0.9);
    ModelConfig cfg = fast_cfg(24, true);
    State s;
    s.u.resize(24);
    s.v.resize(24);
    for (auto& x : s.u) x = unit(rng);
    for (auto& x : s.v) x = unit(rng);

    const double dt = stable_dt(s, cfg, StepControl{});
    const State a = rk4_step(s, dt, cfg);
    const State b = rk4_step_independent(s, dt, cfg);
    CHECK(a.u == b.u);
    CHECK(a.v == b.v);
}

}  // TEST_SUITE
