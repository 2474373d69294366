#pragma once

#include <atomic>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "driftcomp/config_io.hpp"
#include "driftcomp/csv.hpp"
#include "driftcomp/diagnostics.hpp"
#include "driftcomp/integrate.hpp"
#include "driftcomp/oracle.hpp"
#include "driftcomp/plot.hpp"
#include "driftcomp/presets.hpp"

// Scenario execution: resolves a preset name or config file into a run
// directory containing norms.csv, per-time snapshot csv/png pairs, a verdict
// record, the resolved config echo and a manifest listing every artifact.

namespace driftcomp {

struct ResolvedScenario {
    std::string id;
    ConfigBundle bundle;
};

inline ResolvedScenario resolve_scenario(const std::string& name_or_path) {
    if (const Preset* p = find_preset(name_or_path)) return {p->name, p->bundle};
    if (std::filesystem::exists(name_or_path)) {
        std::string id = std::filesystem::path(name_or_path).stem().string();
        return {std::move(id), load_config_file(name_or_path)};
    }
    throw ParseError(ParseErrorCode::PARSE_ERROR, 0,
                     "scenario '" + name_or_path + "' is neither a preset nor a config file");
}

inline ConfigBundle with_overrides(
    ConfigBundle bundle, const std::vector<std::pair<std::string, std::string>>& overrides) {
    for (const auto& [key, value] : overrides) bundle = apply_override(bundle, key, value);
    return bundle;
}

struct RunOptions {
    std::string scenario;
    std::filesystem::path out_dir;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::optional<double> t_end;
    std::vector<double> snapshot_times;  // default: {0, t_end}
    bool halt_on_exclusion = false;
    bool write_plots = true;
    int plot_width = 900;
    int plot_height = 600;
    long long norm_target_rows = 2000;
};

struct ManifestFile {
    std::string path;  // relative to the run directory
    std::string role;  // norms | snapshot | plot | verdict | config_echo
};

struct RunManifest {
    std::string scenario;
    std::filesystem::path out_dir;
    std::vector<ManifestFile> files;
    Outcome outcome;
    long long steps = 0;
    double min_dt = 0.0;
    double max_dt = 0.0;
    double wall_seconds = 0.0;
    std::optional<std::string> halt_reason;
};

namespace detail {

inline std::string time_tag(double t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

inline void write_snapshot_csv(const std::filesystem::path& path, const State& s,
                               const Grid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << "x,u,v\n";
    for (int i = 0; i < grid.n_cells; ++i) {
        const std::size_t si = static_cast<std::size_t>(i);
        csv::write_row(out, {grid.cell_center(i), s.u[si], s.v[si]});
    }
}

inline std::string run_title(const std::string& scenario, const ModelConfig& cfg, double t) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s  t=%g  q=%g d1=%g d2=%g p_u=%g p_v=%g",
                  scenario.c_str(), t, cfg.effective_drift(), cfg.disp_u.d, cfg.disp_v.d,
                  cfg.disp_u.p, cfg.disp_v.p);
    return buf;
}

inline nlohmann::json outcome_to_json(const std::string& scenario, const Outcome& o,
                                      long long steps,
                                      const std::optional<std::string>& halt) {
    nlohmann::json j;
    j["scenario"] = scenario;
    j["verdict"] = to_string(o.verdict);
    j["t_final"] = o.t_final;
    j["u_sup"] = o.u_sup;
    j["v_sup"] = o.v_sup;
    j["v_l2"] = o.v_l2;
    if (o.extinction_time)
        j["extinction_time"] = *o.extinction_time;
    else
        j["extinction_time"] = nullptr;
    j["steps"] = steps;
    if (halt)
        j["halted"] = *halt;
    else
        j["halted"] = nullptr;
    return j;
}

}  // namespace detail

// Norm time series collected by the cadence observer during a run.
struct NormSeries {
    std::vector<NormReport> rows;

    std::vector<std::pair<double, double>> v_l2_series() const {
        std::vector<std::pair<double, double>> out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.emplace_back(r.t, r.v_l2);
        return out;
    }
};

struct RunResult {
    RunManifest manifest;
    State final_state;
    NormSeries norms;
    IntegrateResult integration;
};

inline RunResult run_scenario(const RunOptions& opt) {
    const auto wall0 = std::chrono::steady_clock::now();

    ResolvedScenario rs = resolve_scenario(opt.scenario);
    std::vector<std::pair<std::string, std::string>> overrides = opt.overrides;
    if (opt.t_end) overrides.emplace_back("t_end", csv::fmt(*opt.t_end));
    ConfigBundle bundle = with_overrides(rs.bundle, overrides);
    const ModelConfig& cfg = bundle.cfg;

    std::filesystem::create_directories(opt.out_dir);

    State state;
    state.t = 0.0;
    state.u = realize_ic(bundle.ic_u, cfg.grid);
    state.v = realize_ic(bundle.ic_v, cfg.grid);

    RunResult result;
    RunManifest& man = result.manifest;
    man.scenario = rs.id;
    man.out_dir = opt.out_dir;

    // Config echo first so failed runs still leave the resolved inputs.
    detail::write_text_file(opt.out_dir / "resolved.cfg", dump_config(bundle));
    man.files.push_back({"resolved.cfg", "config_echo"});

    std::vector<double> snapshot_times = opt.snapshot_times;
    if (snapshot_times.empty()) snapshot_times = {0.0, bundle.ctl.t_end};
    std::sort(snapshot_times.begin(), snapshot_times.end());
    snapshot_times.erase(std::unique(snapshot_times.begin(), snapshot_times.end()),
                         snapshot_times.end());

    // Observer cadence aimed at ~norm_target_rows rows.
    long long cadence = 1;
    if (bundle.ctl.t_end > 0) {
        const double dt0 = stable_dt(state, cfg, bundle.ctl);
        const double est_steps = bundle.ctl.t_end / dt0;
        cadence = std::max<long long>(
            1, static_cast<long long>(est_steps / static_cast<double>(opt.norm_target_rows)));
    }

    // Last few residual samples gate the final classification: a verdict is
    // only issued when the run has (numerically) settled.
    std::vector<ResidualSample> recent;
    const double steady_tol = 1e-2;

    IntegrateOptions iopts;
    iopts.observers.push_back({cadence, [&](const State& s, const StepInfo& info) {
                                   result.norms.rows.push_back(compute_norms(s, cfg.grid));
                                   if (recent.size() >= 8) recent.erase(recent.begin());
                                   recent.push_back({info.rhs_inf, info.state_inf});
                                   return std::optional<std::string>{};
                               }});
    if (opt.halt_on_exclusion) {
        // An exclusion verdict with the losing species' L2 norm under the
        // extinction threshold counts as decided: under the regularization
        // the excluded species can re-invade on much longer horizons, so the
        // first certified collapse is the reported outcome.
        const DiagnosticsThresholds th = bundle.diag;
        iopts.observers.push_back(
            {cadence, [&, th](const State& s, const StepInfo&) -> std::optional<std::string> {
                 const Outcome o = classify_outcome(s, cfg.grid, th.exclusion, th.survival);
                 const bool u_gone = o.verdict == Verdict::V_WINS &&
                                     lq_norm(s.u, cfg.grid, 2.0) < th.extinction;
                 const bool v_gone = o.verdict == Verdict::U_WINS && o.v_l2 < th.extinction;
                 if (!u_gone && !v_gone) return std::nullopt;
                 return std::string("exclusion reached: ") + to_string(o.verdict);
             }});
    }

    auto write_snapshot = [&](const State& s) {
        const std::string tag = detail::time_tag(s.t);
        const std::string csv_name = "snap_t" + tag + ".csv";
        detail::write_snapshot_csv(opt.out_dir / csv_name, s, cfg.grid);
        man.files.push_back({csv_name, "snapshot"});
        if (opt.write_plots) {
            const std::string png_name = "snap_t" + tag + ".png";
            std::vector<PlotSeries> series(2);
            series[0] = {"u", cfg.grid.cell_centers(), s.u, 0x1F4E9CU};
            series[1] = {"v", cfg.grid.cell_centers(), s.v, 0xD9542BU};
            PlotSpec ps;
            ps.width = opt.plot_width;
            ps.height = opt.plot_height;
            ps.title = detail::run_title(rs.id, cfg, s.t);
            render_line_plot((opt.out_dir / png_name).string(), ps, series);
            man.files.push_back({png_name, "plot"});
        }
    };
    iopts.checkpoint_times = snapshot_times;
    iopts.on_checkpoint = write_snapshot;

    result.integration = integrate(std::move(state), cfg, bundle.ctl, std::move(iopts));
    result.final_state = result.integration.state;
    man.steps = result.integration.steps;
    man.min_dt = std::isfinite(result.integration.min_dt) ? result.integration.min_dt : 0.0;
    man.max_dt = result.integration.max_dt;
    man.halt_reason = result.integration.halt_reason;

    // A halted run never reaches the remaining checkpoints; snapshot the
    // state it stopped in so the recorded outcome stays inspectable.
    if (man.halt_reason) {
        const std::string name = "snap_t" + detail::time_tag(result.final_state.t) + ".csv";
        bool already = false;
        for (const auto& f : man.files) already = already || f.path == name;
        if (!already) write_snapshot(result.final_state);
    }

    // Norms series.
    {
        std::ofstream out(opt.out_dir / "norms.csv", std::ios::binary);
        out << "t,u_l1,u_l2,u_sup,v_l1,v_l2,v_sup\n";
        for (const auto& r : result.norms.rows)
            csv::write_row(out, {r.t, r.u_l1, r.u_l2, r.u_sup, r.v_l1, r.v_l2, r.v_sup});
        man.files.push_back({"norms.csv", "norms"});
    }

    // Verdict record. Classification is gated on the run being settled: a
    // still-transient final state reports UNDECIDED. Settled means either a
    // small scaled residual at the end or a decided exclusion halt.
    const bool settled =
        steady_state_detector(recent, steady_tol) || man.halt_reason.has_value();
    Outcome outcome = classify_outcome(result.final_state, cfg.grid, bundle.diag.exclusion,
                                       bundle.diag.survival);
    if (!settled) outcome.verdict = Verdict::UNDECIDED;
    const auto v_series = result.norms.v_l2_series();
    outcome.extinction_time = extinction_detector(v_series, bundle.diag.extinction);
    man.outcome = outcome;
    nlohmann::json vj = detail::outcome_to_json(rs.id, outcome, man.steps, man.halt_reason);
    vj["settled"] = settled;
    detail::write_text_file(opt.out_dir / "verdict.json", vj.dump(2) + "\n");
    man.files.push_back({"verdict.json", "verdict"});

    man.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();

    nlohmann::json mj;
    mj["scenario"] = man.scenario;
    mj["out_dir"] = man.out_dir.string();
    mj["steps"] = man.steps;
    mj["min_dt"] = man.min_dt;
    mj["max_dt"] = man.max_dt;
    mj["wall_seconds"] = man.wall_seconds;
    mj["halted"] = man.halt_reason ? nlohmann::json(*man.halt_reason) : nlohmann::json(nullptr);
    mj["files"] = nlohmann::json::array();
    for (const auto& f : man.files) mj["files"].push_back({{"path", f.path}, {"role", f.role}});
    detail::write_text_file(opt.out_dir / "manifest.json", mj.dump(2) + "\n");

    return result;
}

// ---------------------------------------------------------------------------
// Parameter sweeps

struct SweepOptions {
    RunOptions base;
    std::string axis_key;
    std::vector<std::string> values;
    int jobs = 1;
};

struct SweepRow {
    std::string value;
    std::string status;  // "ok" or an error name
    Outcome outcome;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::filesystem::path summary_path;
};

// One isolated run per axis value. Existing run directories (manifest
// present) are reused untouched, so deleting one subdirectory and re-running
// regenerates only that subdirectory.
inline SweepResult run_sweep(const SweepOptions& opt) {
    SweepResult result;
    result.rows.resize(opt.values.size());
    std::filesystem::create_directories(opt.base.out_dir);

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= opt.values.size()) return;
            const std::string& value = opt.values[i];
            SweepRow& row = result.rows[i];
            row.value = value;
            const std::filesystem::path dir = opt.base.out_dir / (opt.axis_key + "=" + value);
            try {
                if (!std::filesystem::exists(dir / "manifest.json")) {
                    RunOptions ro = opt.base;
                    ro.out_dir = dir;
                    ro.overrides.emplace_back(opt.axis_key, value);
                    run_scenario(ro);
                }
                std::ifstream in(dir / "verdict.json");
                if (!in) throw std::runtime_error("missing verdict.json");
                nlohmann::json j = nlohmann::json::parse(in);
                row.outcome.verdict =
                    verdict_from_string(j["verdict"].get<std::string>()).value_or(Verdict::UNDECIDED);
                row.outcome.t_final = j["t_final"].get<double>();
                row.outcome.u_sup = j["u_sup"].get<double>();
                row.outcome.v_sup = j["v_sup"].get<double>();
                row.outcome.v_l2 = j["v_l2"].get<double>();
                if (!j["extinction_time"].is_null())
                    row.outcome.extinction_time = j["extinction_time"].get<double>();
                row.status = "ok";
            } catch (const SimulationError& e) {
                row.status = to_string(e.code());
            } catch (const ConfigError&) {
                row.status = "CONFIG_ERROR";
            } catch (const ParseError& e) {
                row.status = to_string(e.code());
            } catch (const std::exception&) {
                row.status = "ERROR";
            }
        }
    };

    const int jobs = std::max(1, opt.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    result.summary_path = opt.base.out_dir / "summary.csv";
    std::ofstream out(result.summary_path, std::ios::binary);
    out << "value,verdict,u_sup,v_sup,v_l2,extinction_time,status\n";
    for (const auto& row : result.rows) {
        out << row.value << ',' << to_string(row.outcome.verdict) << ','
            << csv::fmt(row.outcome.u_sup) << ',' << csv::fmt(row.outcome.v_sup) << ','
            << csv::fmt(row.outcome.v_l2) << ','
            << (row.outcome.extinction_time ? csv::fmt(*row.outcome.extinction_time)
                                            : std::string("nan"))
            << ',' << row.status << '\n';
    }
    return result;
}

// ---------------------------------------------------------------------------
// Verification mode: main integrator against the independent oracles.

// Fits comparison-ODE constants to the leading fraction of a (t, Y) series
// (Y already raised to the q-th power) by least squares on central
// difference quotients, then lifts C1 so the fit window is dominated
// pointwise. Everything is determined by the fit window alone.
inline BoundCheckConfig fit_bound_constants(
    std::span<const std::pair<double, double>> powered_series, double q,
    double fit_fraction = 0.1) {
    BoundCheckConfig cfg;
    cfg.lebesgue_q = q;
    const std::size_t n_fit = std::max<std::size_t>(
        3, static_cast<std::size_t>(static_cast<double>(powered_series.size()) * fit_fraction));
    const std::size_t n = std::min(n_fit, powered_series.size());
    const double expo = 1.0 + 1.0 / q;

    // Normal equations for dY = c1 + c2 Y - c3 Y^expo.
    double a[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    double b[3] = {0, 0, 0};
    std::size_t rows = 0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dt = powered_series[i + 1].first - powered_series[i - 1].first;
        if (dt <= 0) continue;
        const double y = std::max(powered_series[i].second, 0.0);
        const double dy = (powered_series[i + 1].second - powered_series[i - 1].second) / dt;
        const double phi[3] = {1.0, y, -std::pow(y, expo)};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) a[r][c] += phi[r] * phi[c];
            b[r] += phi[r] * dy;
        }
        ++rows;
    }
    double c[3] = {0.0, 0.0, 1.0};
    if (rows >= 3) {
        // Gaussian elimination with a ridge term for near-singular windows.
        for (int r = 0; r < 3; ++r) a[r][r] += 1e-12;
        for (int col = 0; col < 3; ++col) {
            int piv = col;
            for (int r = col + 1; r < 3; ++r)
                if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
            std::swap(a[col], a[piv]);
            std::swap(b[col], b[piv]);
            if (a[col][col] != 0.0) {
                for (int r = col + 1; r < 3; ++r) {
                    const double f = a[r][col] / a[col][col];
                    for (int cc = col; cc < 3; ++cc) a[r][cc] -= f * a[col][cc];
                    b[r] -= f * b[col];
                }
            }
        }
        for (int r = 2; r >= 0; --r) {
            double s = b[r];
            for (int cc = r + 1; cc < 3; ++cc) s -= a[r][cc] * c[cc];
            c[r] = a[r][r] != 0.0 ? s / a[r][r] : 0.0;
        }
    }
    cfg.ode_c1 = std::max(c[0], 1e-12);
    cfg.ode_c2 = std::max(c[1], 1e-12);
    cfg.ode_c3 = std::max(c[2], 1e-12);

    // Lift C1 until the fitted field dominates every quotient in the window.
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dt = powered_series[i + 1].first - powered_series[i - 1].first;
        if (dt <= 0) continue;
        const double y = std::max(powered_series[i].second, 0.0);
        const double dy = (powered_series[i + 1].second - powered_series[i - 1].second) / dt;
        const double model = cfg.ode_c1 + cfg.ode_c2 * y - cfg.ode_c3 * std::pow(y, expo);
        worst = std::max(worst, dy - model);
    }
    cfg.ode_c1 += worst;
    return cfg;
}

struct VerifyOptions {
    std::string scenario;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::optional<double> t_end;
    bool force = false;  // lift the n_cells <= 64 guard
    // Test fixture: corrupts the stepper's rhs without touching its budget
    // bookkeeping, which the mass-budget check must then catch.
    std::function<void(const State&, std::span<double>, std::span<double>)> rhs_fault_injection;
};

struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_pass = true;

    void add(std::string name, bool pass, std::string detail) {
        all_pass = all_pass && pass;
        checks.push_back({std::move(name), pass, std::move(detail)});
    }
};

inline VerifyReport run_verify(const VerifyOptions& opt) {
    ResolvedScenario rs = resolve_scenario(opt.scenario);
    std::vector<std::pair<std::string, std::string>> overrides = opt.overrides;
    if (opt.t_end) overrides.emplace_back("t_end", csv::fmt(*opt.t_end));
    ConfigBundle bundle = with_overrides(rs.bundle, overrides);
    const ModelConfig& cfg = bundle.cfg;

    if (cfg.grid.n_cells > 64 && !opt.force)
        throw std::invalid_argument(
            "verify is limited to n_cells <= 64 (fine oracle cost); pass --force to override");

    State ic;
    ic.t = 0.0;
    ic.u = realize_ic(bundle.ic_u, cfg.grid);
    ic.v = realize_ic(bundle.ic_v, cfg.grid);

    VerifyReport report;
    char buf[160];

    // 1. Single-step bitwise agreement of the two RK4 implementations.
    {
        const double dt = stable_dt(ic, cfg, bundle.ctl);
        const State a = rk4_step(ic, dt, cfg, bundle.ctl.nonneg_clip_tolerance);
        const State b = rk4_step_independent(ic, dt, cfg, bundle.ctl.nonneg_clip_tolerance);
        const bool same =
            std::memcmp(a.u.data(), b.u.data(), a.u.size() * sizeof(double)) == 0 &&
            std::memcmp(a.v.data(), b.v.data(), a.v.size() * sizeof(double)) == 0;
        report.add("rk4_single_step_bitwise", same,
                   same ? "production and independent RK4 agree bit for bit"
                        : "stepper implementations disagree");
    }

    // 2. Adaptive run with per-step mass-budget audit (collects the norm
    //    series used by the envelope check as well).
    NormSeries norms;
    IntegrateResult res;
    {
        IntegrateOptions iopts;
        iopts.audit_mass_budget = true;
        iopts.rhs_fault_injection = opt.rhs_fault_injection;
        iopts.observers.push_back({1, [&](const State& s, const StepInfo&) {
                                       norms.rows.push_back(compute_norms(s, cfg.grid));
                                       return std::optional<std::string>{};
                                   }});
        res = integrate(ic, cfg, bundle.ctl, std::move(iopts));
        const double worst = std::max(res.max_budget_residual_u, res.max_budget_residual_v);
        const bool pass = worst < 1e-11;
        std::snprintf(buf, sizeof buf, "max per-step budget residual %.3e (limit 1e-11)", worst);
        report.add("mass_budget_audit", pass, buf);
    }

    // 3. Endpoint agreement against the fine forward-Euler oracle.
    {
        const double dt_fixed = std::min(res.min_dt, stable_dt(ic, cfg, bundle.ctl)) / 10.0;
        const OracleRun euler = euler_fine_run(cfg, ic, bundle.ctl.t_end, dt_fixed);
        auto rel_l2 = [&](const std::vector<double>& a, const std::vector<double>& b) {
            double num = 0, da = 0, db = 0;
            for (std::size_t i = 0; i < a.size(); ++i) {
                num += (a[i] - b[i]) * (a[i] - b[i]);
                da += a[i] * a[i];
                db += b[i] * b[i];
            }
            return std::sqrt(num) / std::max({std::sqrt(da), std::sqrt(db), 1e-12});
        };
        const double ru = rel_l2(res.state.u, euler.final_u());
        const double rv = rel_l2(res.state.v, euler.final_v());
        const bool pass = ru <= 0.02 && rv <= 0.02;
        std::snprintf(buf, sizeof buf, "endpoint L2 mismatch u %.3e, v %.3e (limit 2e-2)", ru, rv);
        report.add("euler_endpoint_l2", pass, buf);
    }

    // 4. Comparison-ODE envelope over ||v||_2^2, constants fitted on the
    //    first tenth of the series.
    {
        std::vector<std::pair<double, double>> powered;
        powered.reserve(norms.rows.size());
        for (const auto& r : norms.rows) powered.emplace_back(r.t, r.v_l2 * r.v_l2);
        bool pass = powered.size() >= 10;
        std::string detail = "series too short";
        if (pass) {
            const BoundCheckConfig bc = fit_bound_constants(powered, 2.0);
            std::vector<std::pair<double, double>> series = norms.v_l2_series();
            const BoundCheckReport rep = lq_bound_check(series, bc, powered.front().second, 0.05);
            pass = rep.violations.empty();
            std::snprintf(buf, sizeof buf,
                          "fitted (C1,C2,C3)=(%.3g,%.3g,%.3g), max excess %.3e (limit 5e-2)",
                          bc.ode_c1, bc.ode_c2, bc.ode_c3, rep.max_excess);
            detail = buf;
        }
        report.add("lq_bound_envelope", pass, detail);
    }

    return report;
}

}  // namespace driftcomp
