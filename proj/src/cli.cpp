#include "gridform/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gridform/errors.hpp"
#include "gridform/scenario_io.hpp"
#include "gridform/simulation.hpp"

namespace gridform {

namespace {

std::string fmt9(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

// a:b:step inclusive of a, exclusive of b+eps; a bare number is a single cell
std::vector<double> parse_range(const std::string& text, const std::string& flag) {
    auto bad = [&](const std::string& why) {
        return validation_error(flag + ": " + why + " in '" + text + "'");
    };
    auto num = [&](const std::string& part) {
        const char* begin = part.c_str();
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (part.empty() || end != begin + part.size()) throw bad("not a number");
        return v;
    };
    const auto c1 = text.find(':');
    if (c1 == std::string::npos) return {num(text)};
    const auto c2 = text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw bad("expected a:b:step");
    const double a = num(text.substr(0, c1));
    const double b = num(text.substr(c1 + 1, c2 - c1 - 1));
    const double step = num(text.substr(c2 + 1));
    if (b < a) throw bad("inverted range");
    if (!(step > 0.0)) throw bad("step must be positive");
    std::vector<double> out;
    for (long k = 0;; ++k) {
        const double v = a + static_cast<double>(k) * step;
        if (v > b + step * 1e-9) break;
        out.push_back(v);
    }
    return out;
}

bool overlaps(double a0, double a1, const std::vector<std::pair<double, double>>& windows) {
    for (const auto& w : windows)
        if (std::min(a1, w.second) - std::max(a0, w.first) > 0.0) return true;
    return false;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir) {
    const std::string text = read_file(scenario_path);
    const ParsedScenario parsed = parse_scenario(text);
    const Scenario& scn = parsed.scenario;
    const RunResult result = run(scn, scn.controller);

    std::filesystem::create_directories(out_dir);
    const std::string digest = fnv1a64_hex(text);
    write_timeseries(result.series, out_dir + "/timeseries.csv");
    write_manifest(scn, scn.controller, result.metrics, digest, out_dir + "/manifest.txt");

    const auto& segs = result.metrics.segments;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const SegmentMetrics& s = segs[i];
        const bool bad = overlaps(s.t_start, s.t_end, result.metrics.intervals);
        std::cout << "segment=" << i + 1 << " t_start=" << fmt9(s.t_start)
                  << " t_end=" << fmt9(s.t_end) << " rms_error=" << fmt9(s.rms_error)
                  << " peak_error=" << fmt9(s.peak_error) << " mean_fsw=" << fmt9(s.mean_fsw)
                  << " violated=" << (bad ? "yes" : "no") << '\n';
    }
    return 0;
}

int cmd_sweep(const std::string& vdc_spec, const std::string& vref_spec, double P, double Q,
              bool have_q2, double Q2, double vrated, const std::string& out_path) {
    const std::vector<double> vdc_axis = parse_range(vdc_spec, "--vdc");
    const std::vector<double> vref_axis = parse_range(vref_spec, "--vref");
    std::vector<std::pair<double, double>> loads{{P, Q}};
    if (have_q2) loads.emplace_back(P, Q2);

    CircuitParams params;
    const double omega = 2.0 * M_PI * 50.0;
    const SoaGrid grid = safe_operating_area(vdc_axis, vref_axis, loads, vrated, omega, params);

    std::string csv = "v_dc,v_ref,P,Q,worst_case_V,margin,satisfied\n";
    for (std::size_t i = 0; i < vdc_axis.size(); ++i)
        for (std::size_t j = 0; j < vref_axis.size(); ++j)
            for (std::size_t k = 0; k < loads.size(); ++k) {
                const std::size_t c = grid.index(i, j, k);
                csv += fmt9(vdc_axis[i]) + ',' + fmt9(vref_axis[j]) + ',' +
                       fmt9(loads[k].first) + ',' + fmt9(loads[k].second) + ',' +
                       fmt9(grid.worst_case_V[c]) + ',' + fmt9(grid.cells[c].margin) + ',' +
                       (grid.cells[c].satisfied ? '1' : '0') + '\n';
            }
    write_file(out_path, csv);

    std::ostringstream mf;
    mf << "tool_version = " << kToolVersion << '\n';
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
    mf << "timestamp = " << stamp << '\n';
    mf << "axis.v_dc = " << vdc_spec << '\n';
    mf << "axis.v_ref = " << vref_spec << '\n';
    mf << "load.P = " << fmt9(P) << '\n';
    mf << "load.Q = " << fmt9(Q) << '\n';
    if (have_q2) mf << "load.Q2 = " << fmt9(Q2) << '\n';
    mf << "vrated = " << fmt9(vrated) << '\n';
    mf << "cells = " << grid.cells.size() << '\n';
    write_file(out_path + ".manifest.txt", mf.str());

    std::cout << "cells=" << grid.cells.size() << " out=" << out_path << '\n';
    return 0;
}

int cmd_check(double vdc, double vref, double P, double Q, double Lf, double Cf, double fgrid,
              double vrated) {
    if (!(vdc > 0.0)) throw validation_error("--vdc must be positive");
    if (vref < 0.0) throw validation_error("--vref must be non-negative");
    if (!(fgrid > 0.0)) throw validation_error("--fgrid must be positive");
    CircuitParams params = make_params(Lf, Cf, CircuitParams{}.f_sw);
    const double omega = 2.0 * M_PI * fgrid;
    const LoadSpec load = build_load_from_power(P, Q, vrated, omega);
    const double worst = steady_state_worst_case(vref, load, omega, params);
    const double margin = (vdc - worst) / vdc;
    std::cout << "lhs=" << fmt9(vdc) << " rhs=" << fmt9(worst) << " margin=" << fmt9(margin)
              << ' ' << (margin > 0.0 ? "SATISFIED" : "VIOLATED") << '\n';
    return 0;
}

int cmd_envelope(const std::string& scenario_path, const std::string& out_path) {
    const std::string text = read_file(scenario_path);
    const ParsedScenario parsed = parse_scenario(text);
    const Scenario& scn = parsed.scenario;
    const ControllerConfig& cfg = scn.controller;
    const RunResult result = run(scn, cfg);
    const TimeSeries& ts = result.series;

    std::string csv = "t,predicted_env,simulated_abs_err\n";
    const double ripple = cfg.Bound / cfg.lambda;
    const auto& windows = result.metrics.intervals;
    std::vector<double> predicted(ts.size(), ripple);
    for (const auto& w : windows) {
        std::vector<double> t_in;
        std::vector<std::size_t> idx;
        double x_at_t0 = 0.0, v_dc_w = scn.v_dc0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts.t[i] < w.first || ts.t[i] > w.second) continue;
            if (idx.empty()) {
                x_at_t0 = std::abs(ts.u_o[i] - ts.x_d[i]);
                v_dc_w = ts.v_dc[i];
            }
            idx.push_back(i);
            t_in.push_back(ts.t[i]);
        }
        if (idx.empty()) continue;
        EnvelopeParams env;
        env.dt_window = w.second - w.first;
        env.t_0 = w.first;
        env.J = 1;
        env.H_b = min_bound_estimate(cfg.T_sample, cfg.T_delay, v_dc_w, 0.0, scn.params);
        const std::vector<double> vals =
            error_envelope(env, cfg, v_dc_w, x_at_t0, scn.params, t_in);
        for (std::size_t k = 0; k < idx.size(); ++k) predicted[idx[k]] = vals[k];
    }
    for (std::size_t i = 0; i < ts.size(); ++i)
        csv += fmt9(ts.t[i]) + ',' + fmt9(predicted[i]) + ',' +
               fmt9(std::abs(ts.u_o[i] - ts.x_d[i])) + '\n';
    write_file(out_path, csv);
    std::cout << "records=" << ts.size() << " windows=" << windows.size()
              << " out=" << out_path << '\n';
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Grid-forming inverter simulator and controllability toolkit"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir;
    auto* simulate = app.add_subcommand("simulate", "Run a scenario, write CSV + manifest");
    simulate->add_option("--scenario", scenario_path, "scenario file")->required();
    simulate->add_option("--out", out_dir, "output directory")->required();

    std::string vdc_spec, vref_spec, sweep_out;
    double sw_P = 0.0, sw_Q = 0.0, sw_Q2 = 0.0, sw_vrated = 120.0;
    auto* sweep = app.add_subcommand("sweep", "Safe-operating-area sweep to CSV");
    sweep->add_option("--vdc", vdc_spec, "dc-link axis a:b:step or value")->required();
    sweep->add_option("--vref", vref_spec, "amplitude axis a:b:step or value")->required();
    sweep->add_option("--P", sw_P, "load active power (W)")->required();
    sweep->add_option("--Q", sw_Q, "load reactive power, signed (VAr)")->required();
    auto* q2opt = sweep->add_option("--Q2", sw_Q2, "second load point, same P (VAr)");
    sweep->add_option("--vrated", sw_vrated, "rated peak voltage for load synthesis (V)");
    sweep->add_option("--out", sweep_out, "output CSV path")->required();

    double ck_vdc = 0.0, ck_vref = 0.0, ck_P = 0.0, ck_Q = 0.0;
    double ck_Lf = CircuitParams{}.L_f, ck_Cf = CircuitParams{}.C_f, ck_fgrid = 50.0,
           ck_vrated = 120.0;
    auto* check = app.add_subcommand("check", "Steady-state controllability verdict");
    check->add_option("--vdc", ck_vdc, "dc-link voltage (V)")->required();
    check->add_option("--vref", ck_vref, "reference peak amplitude (V)")->required();
    check->add_option("--P", ck_P, "load active power (W)")->required();
    check->add_option("--Q", ck_Q, "load reactive power, signed (VAr)")->required();
    check->add_option("--Lf", ck_Lf, "filter inductance (H)");
    check->add_option("--Cf", ck_Cf, "filter capacitance (F)");
    check->add_option("--fgrid", ck_fgrid, "grid frequency (Hz)");
    check->add_option("--vrated", ck_vrated, "rated peak voltage for load synthesis (V)");

    std::string env_scenario, env_out;
    auto* envelope = app.add_subcommand("envelope", "Predicted vs simulated error envelope");
    envelope->add_option("--scenario", env_scenario, "scenario file")->required();
    envelope->add_option("--out", env_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(scenario_path, out_dir);
        if (sweep->parsed())
            return cmd_sweep(vdc_spec, vref_spec, sw_P, sw_Q, q2opt->count() > 0, sw_Q2,
                             sw_vrated, sweep_out);
        if (check->parsed())
            return cmd_check(ck_vdc, ck_vref, ck_P, ck_Q, ck_Lf, ck_Cf, ck_fgrid, ck_vrated);
        if (envelope->parsed()) return cmd_envelope(env_scenario, env_out);
    } catch (const simulation_diverged& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}

}  // namespace gridform
