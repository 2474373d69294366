#include <doctest.h>

#include <cmath>

#include "driftcomp/presets.hpp"

using namespace driftcomp;

TEST_SUITE("scenarios") {

TEST_CASE("constant and gaussian families realize as specified") {
    Grid g{1.0, 64};

    auto c = realize_ic(InitialConditionSpec::constant(0.5), g);
    for (double x : c) CHECK(x == 0.5);

    // A centered bump on a symmetric grid is symmetric about the midpoint.
    auto bump = realize_ic(InitialConditionSpec::gaussian(0.8, 0.5, 0.1), g);
    for (int i = 0; i < 32; ++i)
        CHECK(bump[static_cast<std::size_t>(i)] ==
              doctest::Approx(bump[static_cast<std::size_t>(63 - i)]).epsilon(1e-13));
    CHECK(*std::max_element(bump.begin(), bump.end()) <= 0.8);
}

TEST_CASE("step and two-bump families") {
    Grid g{1.0, 10};
    InitialConditionSpec step;
    step.family = IcFamily::STEP;
    step.left = 0.2;
    step.right = 0.7;
    step.edge = 0.5;
    auto f = realize_ic(step, g);
    for (int i = 0; i < 5; ++i) CHECK(f[static_cast<std::size_t>(i)] == 0.2);
    for (int i = 5; i < 10; ++i) CHECK(f[static_cast<std::size_t>(i)] == 0.7);

    InitialConditionSpec two;
    two.family = IcFamily::TWO_BUMPS;
    two.amplitude = 0.5;
    two.center = 0.25;
    two.width = 0.05;
    two.amplitude2 = 0.3;
    two.center2 = 0.75;
    two.width2 = 0.05;
    auto h = realize_ic(two, Grid{1.0, 100});
    CHECK(h[25] == doctest::Approx(0.5).epsilon(0.01));
    CHECK(h[75] == doctest::Approx(0.3).epsilon(0.01));
}

TEST_CASE("invalid initial conditions are rejected") {
    Grid g{1.0, 16};

    InitialConditionSpec table;
    table.family = IcFamily::CUSTOM_TABLE;
    table.table.assign(8, 0.1);  // wrong length
    CHECK_THROWS_AS(realize_ic(table, g), ConfigError);

    table.table.assign(16, 0.1);
    table.table[3] = -0.2;
    CHECK_THROWS_AS(realize_ic(table, g), ConfigError);

    // Identically-zero non-constant realizations are rejected...
    CHECK_THROWS_AS(realize_ic(InitialConditionSpec::gaussian(0.0, 0.5, 0.1), g), ConfigError);
    // ...but the zero constant is the sanctioned empty species.
    auto z = realize_ic(InitialConditionSpec::constant(0.0), g);
    for (double x : z) CHECK(x == 0.0);

    CHECK_THROWS_AS(realize_ic(InitialConditionSpec::gaussian(0.5, 0.5, 0.0), g), ConfigError);
}

TEST_CASE("refining and cell-averaging back reproduces smooth families") {
    const InitialConditionSpec spec = InitialConditionSpec::gaussian(0.5, 0.4, 0.1);
    auto err_at = [&](int n) {
        const auto coarse = realize_ic(spec, Grid{1.0, n});
        const auto fine = realize_ic(spec, Grid{1.0, 2 * n});
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const double avg = 0.5 * (fine[static_cast<std::size_t>(2 * i)] +
                                      fine[static_cast<std::size_t>(2 * i + 1)]);
            worst = std::max(worst, std::abs(avg - coarse[static_cast<std::size_t>(i)]));
        }
        return worst;
    };
    const double e64 = err_at(64);
    const double e128 = err_at(128);
    CHECK(e64 < 1e-3);
    CHECK(e64 / e128 >= 3.0);  // second-order in dx
}

TEST_CASE("preset registry carries the figure scenarios") {
    const Preset* p = find_preset("FIG4_P74");
    REQUIRE(p != nullptr);
    CHECK(p->bundle.cfg.drift_q == 0.5);
    CHECK(p->bundle.cfg.disp_u.d == 0.2);
    CHECK(p->bundle.cfg.disp_v.d == 0.3);
    CHECK(p->bundle.cfg.disp_v.p == 1.75);
    CHECK(p->bundle.cfg.disp_v.epsilon == 1e-4);
    CHECK(p->bundle.cfg.grid.n_cells == 300);
    CHECK(p->bundle.ctl.t_end == 10.0);
    CHECK(p->expected_verdict == Verdict::U_WINS);

    const Preset* k34 = find_preset("FIG5_K34");
    REQUIRE(k34 != nullptr);
    CHECK(k34->bundle.cfg.disp_v.k == 0.75);
    CHECK(k34->bundle.cfg.disp_v.p == 1.75);

    CHECK(find_preset("FIG4_P2") != nullptr);
    CHECK(find_preset("FIG4_P75") != nullptr);
    CHECK(find_preset("FIG6_BOTH_P74") != nullptr);
    CHECK(find_preset("FIG7_PU74_PV75") != nullptr);
    CHECK(find_preset("FIG7_PU75_PV74") != nullptr);
    CHECK(find_preset("NODRIFT_SLOW_WINS") != nullptr);

    CHECK(find_preset("NO_SUCH_PRESET") == nullptr);
}

TEST_CASE("every registered preset is valid and realizable") {
    for (const auto& p : preset_registry()) {
        CAPTURE(p.name);
        CHECK(validate_config(p.bundle.cfg).empty());
        CHECK(p.bundle.ctl.t_end > 0.0);
        CHECK(p.bundle.diag.exclusion < p.bundle.diag.survival);
        const auto u = realize_ic(p.bundle.ic_u, p.bundle.cfg.grid);
        const auto v = realize_ic(p.bundle.ic_v, p.bundle.cfg.grid);
        CHECK(u.size() == static_cast<std::size_t>(p.bundle.cfg.grid.n_cells));
        CHECK(v.size() == u.size());
        // Names are unique.
        int count = 0;
        for (const auto& q : preset_registry())
            if (q.name == p.name) ++count;
        CHECK(count == 1);
    }
}

TEST_CASE("minimal document gets defaults") {
    const ConfigBundle b = load_config_text("m = 1\nt_end = 2.5\n");
    CHECK(b.cfg.grid.length == 1.0);
    CHECK(b.cfg.grid.n_cells == 300);
    CHECK(b.cfg.disp_u.d == 0.2);
    CHECK(b.cfg.disp_v.d == 0.3);
    CHECK(b.cfg.disp_v.k == 1.0);
    CHECK(b.cfg.disp_v.epsilon == 1e-4);
    CHECK(b.cfg.drift_enabled);
    CHECK(b.ctl.t_end == 2.5);
    CHECK(b.ctl.cfl_safety == 0.4);
    CHECK(b.diag.exclusion == doctest::Approx(1e-3));
    CHECK(b.diag.survival == doctest::Approx(1e-1));
    CHECK(b.ic_u.family == IcFamily::GAUSSIAN_BUMP);
}

TEST_CASE("typos and malformed documents are hard errors") {
    // "dl" is a typo for "d1".
    try {
        load_config_text("m = 1\nt_end = 1\ndl = 0.2\n");
        FAIL("expected UNKNOWN_KEY");
    } catch (const ParseError& e) {
        CHECK(e.code() == ParseErrorCode::UNKNOWN_KEY);
        CHECK(e.line() == 3);
    }

    CHECK_THROWS_AS(load_config_text("m 1\n"), ParseError);
    CHECK_THROWS_AS(load_config_text("m = abc\nt_end = 1\n"), ParseError);
    CHECK_THROWS_AS(load_config_text("m = 1\nm = 2\nt_end = 1\n"), ParseError);
    CHECK_THROWS_AS(load_config_text("t_end = 1\n"), ParseError);  // m required
    CHECK_THROWS_AS(load_config_text("m = 1\nt_end = 1\ndrift_enabled = yes\n"), ParseError);
    CHECK_THROWS_AS(load_config_text("m = 1\nt_end = 1\nn_cells = 32.5\n"), ParseError);

    // Well-formed but invalid values surface the validation codes.
    CHECK_THROWS_AS(load_config_text("m = 1\nt_end = 1\np_v = 2.5\n"), ConfigError);
}

TEST_CASE("comments, blank lines and per-cell resources parse") {
    const ConfigBundle b = load_config_text(
        "# resource profile\n"
        "m = 1.0, 1.5, 2.0, 1.5   # four cells\n"
        "\n"
        "n_cells = 4\n"
        "t_end = 1\n");
    REQUIRE(b.cfg.resource_m.size() == 4);
    CHECK(b.cfg.resource_m[2] == 2.0);
    CHECK(b.cfg.m_at(0) == 1.0);
    CHECK(b.cfg.m_mean() == doctest::Approx(1.5));
}

TEST_CASE("overrides replace single keys and revalidate") {
    const Preset* p = find_preset("FIG4_P2");
    REQUIRE(p != nullptr);
    const ConfigBundle b = apply_override(p->bundle, "n_cells", "32");
    CHECK(b.cfg.grid.n_cells == 32);
    CHECK(b.cfg.disp_v.d == p->bundle.cfg.disp_v.d);

    CHECK_THROWS_AS(apply_override(p->bundle, "dl", "0.2"), ParseError);
    CHECK_THROWS_AS(apply_override(p->bundle, "p_v", "2.5"), ConfigError);
}

TEST_CASE("preset bundles survive the dump/load round trip") {
    for (const auto& p : preset_registry()) {
        CAPTURE(p.name);
        const ConfigBundle back = load_config_text(dump_config(p.bundle));
        CHECK(back == p.bundle);
    }
}

}  // TEST_SUITE
