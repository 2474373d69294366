#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "driftcomp/runner.hpp"

using namespace driftcomp;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "driftcomp_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

RunOptions small_run(const std::string& scenario, const fs::path& out) {
    RunOptions opt;
    opt.scenario = scenario;
    opt.out_dir = out;
    opt.overrides = {{"n_cells", "32"}, {"t_end", "0.5"}};
    opt.write_plots = false;
    return opt;
}

}  // namespace

TEST_SUITE("runner") {

TEST_CASE("run emits the declared artifacts and an accurate manifest") {
    const fs::path dir = fresh_dir("artifacts");
    RunOptions opt = small_run("FIG4_P74", dir);
    opt.snapshot_times = {0.0, 0.25, 0.5};
    opt.write_plots = true;

    const RunResult res = run_scenario(opt);

    // Every manifest entry exists on disk.
    for (const auto& f : res.manifest.files) CHECK(fs::exists(dir / f.path));
    CHECK(fs::exists(dir / "manifest.json"));

    // And every emitted file is listed (manifest.json lists the others).
    std::size_t on_disk = 0;
    for (const auto& e : fs::directory_iterator(dir)) {
        (void)e;
        ++on_disk;
    }
    CHECK(on_disk == res.manifest.files.size() + 1);

    // Snapshot files: three csv plus three png.
    int snapshots = 0, plots = 0;
    for (const auto& f : res.manifest.files) {
        if (f.role == "snapshot") ++snapshots;
        if (f.role == "plot") ++plots;
    }
    CHECK(snapshots == 3);
    CHECK(plots == 3);

    // The config echo reparses to the executed bundle.
    const ConfigBundle echoed = load_config_file((dir / "resolved.cfg").string());
    const ConfigBundle expected =
        with_overrides(find_preset("FIG4_P74")->bundle, opt.overrides);
    CHECK(echoed == expected);

    // norms.csv carries the documented column contract.
    const csv::Table norms = csv::read_file((dir / "norms.csv").string());
    REQUIRE(norms.header.size() == 7);
    CHECK(norms.header[0] == "t");
    CHECK(norms.header[6] == "v_sup");
    CHECK(norms.rows.front()[0] == 0.0);
    CHECK(norms.rows.back()[0] == 0.5);
}

TEST_CASE("reruns are byte-identical") {
    const fs::path dir_a = fresh_dir("repro_a");
    const fs::path dir_b = fresh_dir("repro_b");
    RunOptions a = small_run("FIG4_P74", dir_a);
    a.snapshot_times = {0.0, 0.5};
    a.write_plots = true;
    RunOptions b = a;
    b.out_dir = dir_b;

    run_scenario(a);
    run_scenario(b);

    for (const char* name : {"norms.csv", "snap_t0.csv", "snap_t0.5.csv", "snap_t0.png",
                             "snap_t0.5.png", "verdict.json", "resolved.cfg"})
        CHECK(slurp(dir_a / name) == slurp(dir_b / name));
}

TEST_CASE("verdict records reparse and match reclassification") {
    const fs::path dir = fresh_dir("verdict");
    RunOptions opt = small_run("FIG4_P74", dir);
    opt.snapshot_times = {0.0, 0.5};
    const RunResult res = run_scenario(opt);

    nlohmann::json j = nlohmann::json::parse(slurp(dir / "verdict.json"));
    const auto verdict = verdict_from_string(j["verdict"].get<std::string>());
    REQUIRE(verdict.has_value());
    CHECK(*verdict == res.manifest.outcome.verdict);

    // Reclassify from the final snapshot file.
    const csv::Table snap = csv::read_file((dir / "snap_t0.5.csv").string());
    const ConfigBundle bundle = load_config_file((dir / "resolved.cfg").string());
    State final_state;
    final_state.t = 0.5;
    for (const auto& row : snap.rows) {
        final_state.u.push_back(row[1]);
        final_state.v.push_back(row[2]);
    }
    const Outcome reclass = classify_outcome(final_state, bundle.cfg.grid,
                                             bundle.diag.exclusion, bundle.diag.survival);
    if (j["settled"].get<bool>()) {
        CHECK(reclass.verdict == *verdict);
    } else {
        CHECK(*verdict == Verdict::UNDECIDED);
    }
}

TEST_CASE("config files resolve as scenarios") {
    const fs::path dir = fresh_dir("cfgfile");
    const fs::path cfg_path = dir / "toy_model.cfg";
    {
        std::ofstream out(cfg_path);
        out << "m = 1\n"
               "t_end = 0.2\n"
               "n_cells = 24\n"
               "drift_enabled = false\n"
               "ic_u_family = constant\n"
               "ic_u_amplitude = 0.2\n"
               "ic_v_family = constant\n"
               "ic_v_amplitude = 0.1\n";
    }
    RunOptions opt;
    opt.scenario = cfg_path.string();
    opt.out_dir = dir / "run";
    opt.write_plots = false;
    const RunResult res = run_scenario(opt);
    CHECK(res.manifest.scenario == "toy_model");
    CHECK(res.final_state.t == 0.2);
    CHECK(res.final_state.u.size() == 24);
}

TEST_CASE("a zero-length run snapshots the initial data and stays undecided") {
    const fs::path dir = fresh_dir("t0");
    RunOptions opt = small_run("FIG4_P74", dir);
    opt.overrides = {{"n_cells", "32"}};
    opt.t_end = 0.0;
    const RunResult res = run_scenario(opt);

    CHECK(res.manifest.outcome.verdict == Verdict::UNDECIDED);
    CHECK(res.manifest.steps == 0);

    const csv::Table snap = csv::read_file((dir / "snap_t0.csv").string());
    const ConfigBundle bundle = load_config_file((dir / "resolved.cfg").string());
    const auto ic_u = realize_ic(bundle.ic_u, bundle.cfg.grid);
    REQUIRE(snap.rows.size() == ic_u.size());
    for (std::size_t i = 0; i < ic_u.size(); ++i) CHECK(snap.rows[i][1] == ic_u[i]);
}

TEST_CASE("sweeps isolate runs and reuse existing directories") {
    const fs::path dir = fresh_dir("sweep");
    SweepOptions opt;
    opt.base = small_run("FIG4_P74", dir);
    opt.base.overrides = {{"n_cells", "32"}, {"t_end", "0.3"}};
    opt.axis_key = "p_v";
    opt.values = {"2", "1.75"};
    opt.jobs = 1;

    const SweepResult first = run_sweep(opt);
    REQUIRE(first.rows.size() == 2);
    CHECK(first.rows[0].status == "ok");
    CHECK(first.rows[1].status == "ok");
    CHECK(fs::exists(dir / "p_v=2" / "manifest.json"));
    CHECK(fs::exists(dir / "p_v=1.75" / "manifest.json"));
    const std::string summary_before = slurp(dir / "summary.csv");

    // Tamper with one run, delete the other: only the deleted one reruns.
    const std::string tampered = slurp(dir / "p_v=2" / "norms.csv") + "tampered\n";
    {
        std::ofstream out(dir / "p_v=2" / "norms.csv", std::ios::binary);
        out << tampered;
    }
    const std::string kept_norms = slurp(dir / "p_v=1.75" / "norms.csv");
    fs::remove_all(dir / "p_v=1.75");

    const SweepResult second = run_sweep(opt);
    CHECK(slurp(dir / "p_v=2" / "norms.csv") == tampered);          // untouched
    CHECK(slurp(dir / "p_v=1.75" / "norms.csv") == kept_norms);     // regenerated identically
    CHECK(slurp(dir / "summary.csv") == summary_before);
    CHECK(second.rows[0].status == "ok");
}

TEST_CASE("a single-value sweep reproduces the plain run's artifacts") {
    const fs::path run_dir = fresh_dir("degenerate_run");
    const fs::path sweep_dir = fresh_dir("degenerate_sweep");

    RunOptions direct = small_run("FIG4_P74", run_dir);
    direct.overrides = {{"n_cells", "32"}, {"t_end", "0.3"}, {"p_v", "1.75"}};
    run_scenario(direct);

    SweepOptions sw;
    sw.base = small_run("FIG4_P74", sweep_dir);
    sw.base.overrides = {{"n_cells", "32"}, {"t_end", "0.3"}};
    sw.axis_key = "p_v";
    sw.values = {"1.75"};
    run_sweep(sw);

    for (const char* name : {"norms.csv", "verdict.json", "resolved.cfg"})
        CHECK(slurp(run_dir / name) == slurp(sweep_dir / "p_v=1.75" / name));
}

TEST_CASE("sweep summaries are independent of the job count") {
    const fs::path dir1 = fresh_dir("sweep_j1");
    const fs::path dir2 = fresh_dir("sweep_j2");
    SweepOptions opt;
    opt.base = small_run("FIG4_P74", dir1);
    opt.base.overrides = {{"n_cells", "32"}, {"t_end", "0.3"}};
    opt.axis_key = "p_v";
    opt.values = {"2", "1.75", "1.4"};
    opt.jobs = 1;
    run_sweep(opt);

    opt.base.out_dir = dir2;
    opt.jobs = 3;
    run_sweep(opt);

    CHECK(slurp(dir1 / "summary.csv") == slurp(dir2 / "summary.csv"));
    for (const auto& v : opt.values)
        CHECK(slurp(dir1 / ("p_v=" + v) / "norms.csv") ==
              slurp(dir2 / ("p_v=" + v) / "norms.csv"));
}

TEST_CASE("failed sweep values are recorded, not fatal") {
    const fs::path dir = fresh_dir("sweep_fail");
    SweepOptions opt;
    opt.base = small_run("FIG4_P74", dir);
    opt.base.overrides = {{"n_cells", "32"}, {"t_end", "0.1"}};
    opt.axis_key = "p_v";
    opt.values = {"1.75", "2.5"};  // 2.5 violates p in (1,2]
    const SweepResult res = run_sweep(opt);
    CHECK(res.rows[0].status == "ok");
    CHECK(res.rows[1].status == "CONFIG_ERROR");
}

TEST_CASE("verify passes on a small scenario") {
    VerifyOptions opt;
    opt.scenario = "FIG4_P74";
    opt.overrides = {{"n_cells", "32"}, {"t_end", "0.5"}};
    const VerifyReport report = run_verify(opt);
    for (const auto& c : report.checks) {
        CAPTURE(c.name);
        CAPTURE(c.detail);
        CHECK(c.pass);
    }
    CHECK(report.all_pass);
}

TEST_CASE("verify rejects large grids unless forced") {
    VerifyOptions opt;
    opt.scenario = "FIG4_P74";
    CHECK_THROWS_AS(run_verify(opt), std::invalid_argument);  // preset is N = 300
}

TEST_CASE("an injected flux fault trips the mass-budget check") {
    VerifyOptions opt;
    opt.scenario = "FIG4_P74";
    opt.overrides = {{"n_cells", "32"}, {"t_end", "0.2"}};
    opt.rhs_fault_injection = [](const State&, std::span<double> du, std::span<double>) {
        du[0] += 1e-3;  // unaccounted source in the first cell
    };
    const VerifyReport report = run_verify(opt);
    CHECK_FALSE(report.all_pass);
    bool budget_failed = false;
    for (const auto& c : report.checks)
        if (c.name == "mass_budget_audit" && !c.pass) budget_failed = true;
    CHECK(budget_failed);
}

TEST_CASE("plots render deterministically from snapshots") {
    const fs::path dir = fresh_dir("plots");
    RunOptions opt = small_run("FIG4_P74", dir);
    opt.overrides = {{"n_cells", "32"}, {"t_end", "0.2"}};
    opt.snapshot_times = {0.0, 0.2};
    opt.write_plots = true;
    run_scenario(opt);

    CHECK(fs::exists(dir / "snap_t0.png"));
    const std::string png1 = slurp(dir / "snap_t0.2.png");

    // Re-render the same snapshot through the standalone plotting path.
    const csv::Table snap = csv::read_file((dir / "snap_t0.2.csv").string());
    std::vector<PlotSeries> series(2);
    series[0].label = "u";
    series[0].rgb = 0x1F4E9CU;
    series[1].label = "v";
    series[1].rgb = 0xD9542BU;
    for (const auto& row : snap.rows) {
        series[0].x.push_back(row[0]);
        series[0].y.push_back(row[1]);
        series[1].x.push_back(row[0]);
        series[1].y.push_back(row[2]);
    }
    PlotSpec ps;
    render_line_plot((dir / "replot_a.png").string(), ps, series);
    render_line_plot((dir / "replot_b.png").string(), ps, series);
    CHECK(slurp(dir / "replot_a.png") == slurp(dir / "replot_b.png"));

    // PNG signature sanity.
    CHECK(png1.size() > 100);
    CHECK(static_cast<unsigned char>(png1[0]) == 0x89);
    CHECK(png1.substr(1, 3) == "PNG");
}

TEST_CASE("an absent species renders as a flat zero curve") {
    const fs::path dir = fresh_dir("flat_plot");
    Grid g{1.0, 32};
    std::vector<PlotSeries> series(2);
    series[0].label = "u";
    series[0].rgb = 0x1F4E9CU;
    series[1].label = "v";
    series[1].rgb = 0xD9542BU;
    for (int i = 0; i < 32; ++i) {
        const double x = g.cell_center(i);
        series[0].x.push_back(x);
        series[0].y.push_back(0.4 + 0.2 * std::sin(6.0 * x));
        series[1].x.push_back(x);
        series[1].y.push_back(0.0);
    }
    PlotSpec spec;
    spec.title = "flat v";
    render_line_plot((dir / "flat.png").string(), spec, series);
    const std::string png = slurp(dir / "flat.png");
    CHECK(png.size() > 100);
    CHECK(png.substr(1, 3) == "PNG");
}

TEST_CASE("halt on exclusion stops once the verdict is decided") {
    const fs::path dir = fresh_dir("halt");
    RunOptions opt;
    opt.scenario = "FIG4_P74";
    opt.out_dir = dir;
    // Start v at the sanctioned zero so exclusion is immediate.
    opt.overrides = {{"n_cells", "32"}, {"t_end", "50"}, {"ic_v_family", "constant"},
                     {"ic_v_amplitude", "0"}, {"ic_u_family", "constant"},
                     {"ic_u_amplitude", "0.9"}};
    opt.write_plots = false;
    opt.halt_on_exclusion = true;
    const RunResult res = run_scenario(opt);
    CHECK(res.manifest.outcome.verdict == Verdict::U_WINS);
    REQUIRE(res.manifest.halt_reason.has_value());
    CHECK(res.final_state.t < 50.0);
}

}  // TEST_SUITE
