// driftcomp: deterministic 1D simulator for two-species competition with
// drift, where dispersal mixes linear diffusion and regularized p-Laplacian
// fast diffusion. Subcommands: run, sweep, verify, plot, presets.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "driftcomp/runner.hpp"

namespace {

namespace fs = std::filesystem;
using namespace driftcomp;

std::vector<std::pair<std::string, std::string>> parse_sets(const std::vector<std::string>& raw) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& s : raw) {
        const std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ParseError(ParseErrorCode::PARSE_ERROR, 0,
                             "--set expects key=value, got '" + s + "'");
        out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return out;
}

std::vector<double> parse_times(const std::string& csv_list) {
    std::vector<double> out;
    if (csv_list.empty()) return out;
    std::size_t start = 0;
    while (start <= csv_list.size()) {
        const std::size_t comma = csv_list.find(',', start);
        const std::string item = csv_list.substr(
            start, comma == std::string::npos ? csv_list.size() - start : comma - start);
        char* end = nullptr;
        const double t = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || *end != '\0')
            throw ParseError(ParseErrorCode::PARSE_ERROR, 0, "bad time value '" + item + "'");
        out.push_back(t);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void parse_plot_size(const std::string& wxh, int& w, int& h) {
    const std::size_t x = wxh.find('x');
    if (x == std::string::npos)
        throw ParseError(ParseErrorCode::PARSE_ERROR, 0, "--plot-size expects WxH");
    w = std::atoi(wxh.substr(0, x).c_str());
    h = std::atoi(wxh.substr(x + 1).c_str());
    if (w <= 0 || h <= 0)
        throw ParseError(ParseErrorCode::PARSE_ERROR, 0, "--plot-size expects positive WxH");
}

fs::path default_out_dir(const std::string& given, const std::string& scenario) {
    if (!given.empty()) return given;
    const char* env = std::getenv("DRIFTCOMP_OUT");
    const fs::path base = env && *env ? fs::path(env) : fs::path("out");
    return base / fs::path(scenario).stem();
}

int cmd_run(const std::string& scenario, const std::string& out, const std::string& snapshots,
            const std::vector<std::string>& sets, double t_end, bool has_t_end,
            const std::string& plot_size, bool no_plots, bool halt_on_exclusion) {
    RunOptions opt;
    opt.scenario = scenario;
    opt.out_dir = default_out_dir(out, scenario);
    opt.overrides = parse_sets(sets);
    if (has_t_end) opt.t_end = t_end;
    opt.snapshot_times = parse_times(snapshots);
    opt.write_plots = !no_plots;
    opt.halt_on_exclusion = halt_on_exclusion;
    if (!plot_size.empty()) parse_plot_size(plot_size, opt.plot_width, opt.plot_height);

    const RunResult res = run_scenario(opt);
    const Outcome& o = res.manifest.outcome;
    std::printf("scenario   %s\n", res.manifest.scenario.c_str());
    std::printf("out_dir    %s\n", res.manifest.out_dir.string().c_str());
    std::printf("steps      %lld  (dt in [%.3e, %.3e])\n", res.manifest.steps,
                res.manifest.min_dt, res.manifest.max_dt);
    if (res.manifest.halt_reason)
        std::printf("halted     %s\n", res.manifest.halt_reason->c_str());
    std::printf("verdict    %s  (t=%g, u_sup=%.6g, v_sup=%.6g, v_l2=%.6g)\n",
                to_string(o.verdict), o.t_final, o.u_sup, o.v_sup, o.v_l2);
    if (o.extinction_time)
        std::printf("extinction t=%.6g (v L2 below threshold)\n", *o.extinction_time);
    return 0;
}

int cmd_sweep(const std::string& scenario, const std::string& out, const std::string& axis,
              const std::string& values, const std::vector<std::string>& sets, double t_end,
              bool has_t_end, int jobs, bool no_plots) {
    SweepOptions opt;
    opt.base.scenario = scenario;
    opt.base.out_dir = default_out_dir(out, scenario + "_sweep");
    opt.base.overrides = parse_sets(sets);
    if (has_t_end) opt.base.t_end = t_end;
    opt.base.write_plots = !no_plots;
    opt.axis_key = axis;
    opt.jobs = jobs;
    {
        std::size_t start = 0;
        while (start <= values.size()) {
            const std::size_t comma = values.find(',', start);
            opt.values.push_back(values.substr(
                start, comma == std::string::npos ? values.size() - start : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
    }
    if (opt.values.empty())
        throw ParseError(ParseErrorCode::PARSE_ERROR, 0, "--values list is empty");

    const SweepResult res = run_sweep(opt);
    std::printf("%-14s %-10s %-12s %-12s %-12s %s\n", "value", "verdict", "u_sup", "v_sup",
                "v_l2", "status");
    for (const auto& row : res.rows)
        std::printf("%-14s %-10s %-12.5g %-12.5g %-12.5g %s\n", row.value.c_str(),
                    to_string(row.outcome.verdict), row.outcome.u_sup, row.outcome.v_sup,
                    row.outcome.v_l2, row.status.c_str());
    std::printf("summary    %s\n", res.summary_path.string().c_str());
    for (const auto& row : res.rows)
        if (row.status != "ok") return 0;  // per-run failures are recorded, not fatal
    return 0;
}

int cmd_verify(const std::string& scenario, const std::vector<std::string>& sets, double t_end,
               bool has_t_end, bool force) {
    VerifyOptions opt;
    opt.scenario = scenario;
    opt.overrides = parse_sets(sets);
    if (has_t_end) opt.t_end = t_end;
    opt.force = force;

    const VerifyReport report = run_verify(opt);
    for (const auto& c : report.checks)
        std::printf("[%s] %-24s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.c_str());
    if (!report.all_pass) {
        std::fprintf(stderr, "error: verification failed\n");
        return 4;
    }
    return 0;
}

int cmd_plot(const std::vector<std::string>& files, const std::string& out,
             const std::string& plot_size) {
    int w = 900, h = 600;
    if (!plot_size.empty()) parse_plot_size(plot_size, w, h);
    for (const auto& file : files) {
        csv::Table t = csv::read_file(file);
        const int cx = t.column("x"), cu = t.column("u"), cv = t.column("v");
        if (cx < 0 || cu < 0 || cv < 0)
            throw ParseError(ParseErrorCode::PARSE_ERROR, 0,
                             "snapshot '" + file + "' must carry columns x,u,v");
        std::vector<PlotSeries> series(2);
        series[0].label = "u";
        series[0].rgb = 0x1F4E9CU;
        series[1].label = "v";
        series[1].rgb = 0xD9542BU;
        for (const auto& row : t.rows) {
            series[0].x.push_back(row[static_cast<std::size_t>(cx)]);
            series[0].y.push_back(row[static_cast<std::size_t>(cu)]);
            series[1].x.push_back(row[static_cast<std::size_t>(cx)]);
            series[1].y.push_back(row[static_cast<std::size_t>(cv)]);
        }
        PlotSpec spec;
        spec.width = w;
        spec.height = h;
        spec.title = fs::path(file).stem().string();
        fs::path png = fs::path(file).replace_extension(".png");
        if (!out.empty()) {
            fs::create_directories(out);
            png = fs::path(out) / png.filename();
        }
        render_line_plot(png.string(), spec, series);
        std::printf("wrote %s\n", png.string().c_str());
    }
    return 0;
}

int cmd_presets() {
    std::printf("%-18s %-9s %5s %5s %5s %5s %5s %6s %8s  %s\n", "name", "verdict", "d1", "d2",
                "p_u", "p_v", "k_v", "q", "t_end", "description");
    for (const auto& p : preset_registry()) {
        const ModelConfig& c = p.bundle.cfg;
        std::printf("%-18s %-9s %5g %5g %5g %5g %5g %6g %8g  %s\n", p.name.c_str(),
                    to_string(p.expected_verdict), c.disp_u.d, c.disp_v.d, c.disp_u.p,
                    c.disp_v.p, c.disp_v.k, c.effective_drift(), p.bundle.ctl.t_end,
                    p.description.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-species competition with drift and p-Laplacian fast diffusion"};
    app.require_subcommand(1);

    std::string scenario, out, snapshots, plot_size, axis, values;
    std::vector<std::string> sets, plot_files;
    double t_end = 0.0;
    int jobs = 1;
    bool force = false, no_plots = false, halt_on_exclusion = false;

    auto* run = app.add_subcommand("run", "integrate one scenario and emit its artifacts");
    run->add_option("scenario", scenario, "preset name or config file")->required();
    run->add_option("--out", out, "output directory (default $DRIFTCOMP_OUT or ./out)");
    auto* run_tend = run->add_option("--t-end", t_end, "override the end time");
    run->add_option("--snapshots", snapshots, "comma-separated snapshot times");
    run->add_option("--set", sets, "config override key=value (repeatable)");
    run->add_option("--plot-size", plot_size, "plot raster size WxH (default 900x600)");
    run->add_flag("--no-plots", no_plots, "skip plot rendering");
    run->add_flag("--halt-on-exclusion", halt_on_exclusion,
                  "stop once one species is excluded and the residual is small");

    auto* sweep = app.add_subcommand("sweep", "run one scenario across an axis of values");
    sweep->add_option("scenario", scenario, "preset name or config file")->required();
    sweep->add_option("--axis", axis, "config key to sweep")->required();
    sweep->add_option("--values", values, "comma-separated axis values")->required();
    sweep->add_option("--out", out, "output directory");
    auto* sweep_tend = sweep->add_option("--t-end", t_end, "override the end time");
    sweep->add_option("--set", sets, "config override key=value (repeatable)");
    sweep->add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);
    sweep->add_flag("--no-plots", no_plots, "skip plot rendering");

    auto* verify = app.add_subcommand("verify", "cross-check the integrator against oracles");
    verify->add_option("scenario", scenario, "preset name or config file")->required();
    verify->add_option("--set", sets, "config override key=value (repeatable)");
    auto* verify_tend = verify->add_option("--t-end", t_end, "override the end time");
    verify->add_flag("--force", force, "allow n_cells > 64");

    auto* plot = app.add_subcommand("plot", "render snapshot csv files to png");
    plot->add_option("files", plot_files, "snapshot csv files")->expected(-1);
    plot->add_option("--out", out, "directory for the rendered images");
    plot->add_option("--plot-size", plot_size, "plot raster size WxH");

    auto* presets = app.add_subcommand("presets", "list the built-in scenarios");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(scenario, out, snapshots, sets, t_end, !run_tend->empty(), plot_size,
                           no_plots, halt_on_exclusion);
        if (sweep->parsed())
            return cmd_sweep(scenario, out, axis, values, sets, t_end, !sweep_tend->empty(),
                             jobs, no_plots);
        if (verify->parsed())
            return cmd_verify(scenario, sets, t_end, !verify_tend->empty(), force);
        if (plot->parsed()) return cmd_plot(plot_files, out, plot_size);
        if (presets->parsed()) return cmd_presets();
    } catch (const SimulationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
