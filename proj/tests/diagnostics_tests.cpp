#include <doctest.h>

#include <cmath>
#include <random>

#include "driftcomp/diagnostics.hpp"
#include "driftcomp/oracle.hpp"

using namespace driftcomp;

TEST_SUITE("diagnostics") {

TEST_CASE("lq norms of simple fields") {
    Grid g{1.0, 8};

    std::vector<double> c(8, 0.7);
    for (double q : {1.0, 2.0, 3.7}) CHECK(lq_norm(c, g, q) == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(lq_norm(c, g, std::numeric_limits<double>::infinity()) == 0.7);

    // Indicator of half the domain at height 2, q = 2: sqrt(4 * 0.5) = sqrt(2).
    std::vector<double> ind(8, 0.0);
    for (int i = 0; i < 4; ++i) ind[static_cast<std::size_t>(i)] = 2.0;
    CHECK(lq_norm(ind, g, 2.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));

    std::vector<double> zero(8, 0.0);
    for (double q : {1.0, 2.0, 5.0}) CHECK(lq_norm(zero, g, q) == 0.0);
}

TEST_CASE("lq norm is monotone in the field") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Grid g{1.0, 32};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> lo(32), hi(32);
        for (int i = 0; i < 32; ++i) {
            lo[static_cast<std::size_t>(i)] = unit(rng);
            hi[static_cast<std::size_t>(i)] = lo[static_cast<std::size_t>(i)] + unit(rng);
        }
        const double q = 1.0 + 9.0 * unit(rng);
        CHECK(lq_norm(hi, g, q) >= lq_norm(lo, g, q));
    }
}

TEST_CASE("high-q norms approach the sup norm") {
    Grid g{1.0, 16};
    std::vector<double> spike(16, 0.0);
    spike[5] = 1.0;
    const double n64 = lq_norm(spike, g, 64.0);
    CHECK(n64 <= 1.0);
    CHECK(n64 >= 0.95);  // dx^(1/64) with dx = 1/16
}

TEST_CASE("l1 is bounded by the sup norm times the domain length") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> unit(0.0, 2.0);
    Grid g{3.0, 24};
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> f(24);
        for (auto& x : f) x = unit(rng);
        CHECK(lq_norm(f, g, 1.0) <= sup_norm(f) * g.length + 1e-12);
    }
}

TEST_CASE("outcome classification") {
    Grid g{1.0, 4};
    State s;
    s.t = 50.0;

    s.u = {0.9, 0.9, 0.9, 0.9};
    s.v = {1e-6, 1e-6, 1e-6, 1e-6};
    CHECK(classify_outcome(s, g, 1e-3, 1e-1).verdict == Verdict::U_WINS);

    std::swap(s.u, s.v);
    CHECK(classify_outcome(s, g, 1e-3, 1e-1).verdict == Verdict::V_WINS);

    s.u = {0.4, 0.4, 0.4, 0.4};
    s.v = {0.4, 0.4, 0.4, 0.4};
    CHECK(classify_outcome(s, g, 1e-3, 1e-1).verdict == Verdict::COEXIST);

    s.u = {1e-5, 1e-5, 1e-5, 1e-5};
    s.v = {1e-2, 1e-2, 1e-2, 1e-2};  // v below survival: washed out
    CHECK(classify_outcome(s, g, 1e-3, 1e-1).verdict == Verdict::UNDECIDED);
}

TEST_CASE("classification is scale-threshold consistent") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unit(1e-5, 1.0);
    Grid g{1.0, 4};
    for (int trial = 0; trial < 100; ++trial) {
        State s;
        s.u.assign(4, unit(rng));
        s.v.assign(4, unit(rng));
        const double excl = unit(rng) * 0.01;
        const double surv = excl + unit(rng);
        const double c = std::pow(10.0, -2.0 + 4.0 * unit(rng));
        State sc = s;
        for (auto& x : sc.u) x *= c;
        for (auto& x : sc.v) x *= c;
        CHECK(classify_outcome(s, g, excl, surv).verdict ==
              classify_outcome(sc, g, excl * c, surv * c).verdict);
    }
}

TEST_CASE("steady-state detector") {
    std::vector<ResidualSample> window(5, {0.0, 1.0});
    CHECK(steady_state_detector(window, 1e-6));

    // Homogeneous logistic far from the plateau: residual ~ 0.09 vs state 0.1.
    window.assign(5, {0.09, 0.1});
    CHECK_FALSE(steady_state_detector(window, 1e-3));

    window = {{1e-9, 1.0}, {0.5, 1.0}, {1e-9, 1.0}};
    CHECK_FALSE(steady_state_detector(window, 1e-3));

    CHECK_FALSE(steady_state_detector({}, 1.0));
}

TEST_CASE("extinction detector") {
    using Series = std::vector<std::pair<double, double>>;

    Series zero = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    auto t = extinction_detector(zero, 1e-6);
    REQUIRE(t.has_value());
    CHECK(*t == 0.0);

    Series direct = {{0.0, 1.0}, {1.0, 0.5}, {2.0, 1e-9}};
    t = extinction_detector(direct, 1e-6);
    REQUIRE(t.has_value());
    CHECK(*t == 2.0);

    // A dip that rebounds is a transient, not extinction.
    Series dip = {{0.0, 1.0}, {1.0, 1e-7}, {2.0, 0.5}, {3.0, 0.4}};
    CHECK_FALSE(extinction_detector(dip, 1e-6).has_value());

    Series none = {{0.0, 1.0}, {1.0, 0.9}, {2.0, 0.8}};
    CHECK_FALSE(extinction_detector(none, 1e-6).has_value());
}

TEST_CASE("comparison envelope accepts series at or below the bound") {
    BoundCheckConfig cfg;
    cfg.lebesgue_q = 2.0;
    cfg.ode_c1 = 1.0;
    cfg.ode_c2 = 1.0;
    cfg.ode_c3 = 1.0;

    SUBCASE("identically zero series") {
        std::vector<std::pair<double, double>> series;
        for (int i = 0; i <= 50; ++i) series.emplace_back(0.1 * i, 0.0);
        const auto report = lq_bound_check(series, cfg, 0.0, 0.05);
        CHECK(report.violations.empty());
    }

    SUBCASE("the envelope itself sits on the boundary") {
        const auto sol = comparison_ode_solve(1.0, 1.0, 1.0, 2.0, 0.2, 5.0);
        std::vector<std::pair<double, double>> series;
        for (std::size_t i = 0; i < sol.t.size(); i += 500)
            series.emplace_back(sol.t[i], std::sqrt(sol.y[i]));
        const auto report = lq_bound_check(series, cfg, 0.2, 0.05);
        CHECK(report.violations.empty());
        CHECK(report.max_excess < 0.01);
    }

    SUBCASE("a series above the envelope is flagged") {
        std::vector<std::pair<double, double>> series;
        for (int i = 0; i <= 20; ++i) series.emplace_back(0.5 * i, 10.0 + i);
        const auto report = lq_bound_check(series, cfg, 0.0, 0.05);
        CHECK_FALSE(report.violations.empty());
    }
}

TEST_CASE("the long-time envelope converges to the bisected equilibrium") {
    // Root of 1 + y - y^(3/2) = 0, bisected independently here.
    auto f = [](double y) { return 1.0 + y - std::pow(y, 1.5); };
    double lo = 1.0, hi = 8.0;
    REQUIRE(f(lo) > 0.0);
    REQUIRE(f(hi) < 0.0);
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    const double root = 0.5 * (lo + hi);

    const auto sol = comparison_ode_solve(1.0, 1.0, 1.0, 2.0, 0.0, 60.0);
    CHECK(sol.equilibrium == doctest::Approx(root).epsilon(1e-10));
    CHECK(sol.y.back() == doctest::Approx(root).epsilon(1e-6));
}

TEST_CASE("finite-time-extinction inequality checker") {
    SUBCASE("constant zero series needs C3 >= 0") {
        std::vector<std::pair<double, double>> series;
        for (int i = 0; i <= 20; ++i) series.emplace_back(0.1 * i, 0.0);
        CHECK(fte_inequality_check(series, 0.0, 0.0, 1.0, 0.5).fraction == 1.0);
        CHECK(fte_inequality_check(series, 0.0, -1.0, 1.0, 0.5).fraction == 0.0);
    }

    SUBCASE("the closed-form collapse satisfies its own inequality") {
        // Y(t) = (1 - t/T*)^(1/(1-alpha)) solves Y' = -Ctilde Y^alpha with
        // Ctilde = 1/((1-alpha) T*).
        const double alpha = 0.5, t_star = 1.0;
        const double ctilde = 1.0 / ((1.0 - alpha) * t_star);
        std::vector<std::pair<double, double>> series;
        for (int i = 0; i <= 9990; ++i) {
            const double t = 1e-4 * i;
            series.emplace_back(t, std::pow(1.0 - t / t_star, 1.0 / (1.0 - alpha)));
        }
        const auto rep = fte_inequality_check(series, 0.0, 0.0, ctilde, alpha, 1e-3);
        CHECK(rep.fraction == 1.0);
    }

    SUBCASE("an increasing series violates the pure-sink inequality") {
        std::vector<std::pair<double, double>> series;
        for (int i = 0; i <= 20; ++i) series.emplace_back(0.1 * i, 0.1 + 0.1 * i);
        const auto rep = fte_inequality_check(series, 0.0, 0.0, 1.0, 0.5, 1e-9);
        CHECK(rep.fraction == 0.0);
    }
}

TEST_CASE("mass-budget residuals") {
    SUBCASE("zero state gives exactly zero residual") {
        Grid g{1.0, 8};
        State a, b;
        a.u.assign(8, 0.0);
        a.v.assign(8, 0.0);
        b = a;
        StepBudget budget;
        budget.dt = 0.1;
        const auto [ru, rv] = mass_budget_residual(a, b, budget, g);
        CHECK(ru == 0.0);
        CHECK(rv == 0.0);
    }

    SUBCASE("with drift and constant v the outflow accounts for the change") {
        ModelConfig cfg;
        cfg.grid = {1.0, 16};
        cfg.disp_u = {0.2, 0.0, 2.0, 1e-4};
        cfg.disp_v = {0.3, 0.0, 2.0, 1e-4};
        cfg.drift_q = 0.5;
        cfg.drift_enabled = true;
        cfg.resource_m = {1.0};

        State s0;
        s0.u.assign(16, 0.0);
        s0.v.assign(16, 0.8);

        StepControl ctl;
        ctl.t_end = 1e-3;
        IntegrateOptions opts;
        opts.audit_mass_budget = true;
        opts.include_reaction = false;
        double seen_outflow = -1.0, seen_dt = 0.0, dmass = 0.0;
        const double dx = cfg.grid.dx();
        opts.on_budget = [&](const StepBudget& b, const State& before, const State& after) {
            seen_outflow = b.boundary_net_v;
            seen_dt = b.dt;
            double m0 = 0, m1 = 0;
            for (double x : before.v) m0 += x * dx;
            for (double x : after.v) m1 += x * dx;
            dmass = m1 - m0;
        };
        const IntegrateResult res = integrate(s0, cfg, ctl, std::move(opts));
        CHECK(res.max_budget_residual_v < 1e-12);
        // First cell drains but the donor boundary cell is untouched in one
        // step, so the recorded outflow is exactly q * v_N at every stage.
        CHECK(seen_outflow == doctest::Approx(0.5 * 0.8).epsilon(1e-14));
        CHECK(dmass == doctest::Approx(-seen_dt * 0.5 * 0.8).epsilon(1e-10));
    }
}

}  // TEST_SUITE
