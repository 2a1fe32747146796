#include "gridform/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridform/errors.hpp"

namespace gridform {

void validate_scenario(const Scenario& scn) {
    validate_params(scn.params);
    if (!(scn.dt > 0.0)) throw validation_error("dt must be positive");
    if (scn.dt > 1.0 / (20.0 * scn.params.f_sw))
        throw validation_error("dt too large: need at least 20 integration steps per "
                               "switching period (dt <= " +
                               std::to_string(1.0 / (20.0 * scn.params.f_sw)) + ")");
    if (scn.t_end < 0.0) throw validation_error("t_end must be non-negative");
    if (!(scn.f_grid > 0.0)) throw validation_error("f_grid must be positive");
    if (!(scn.v_dc0 > 0.0)) throw validation_error("initial v_dc must be positive");
    if (scn.vref_amp0 < 0.0) throw validation_error("initial amplitude must be non-negative");
    if (scn.P0 < 0.0) throw validation_error("initial load P must be non-negative");
    if ((scn.P0 != 0.0 || scn.Q0 != 0.0) && scn.vref_amp0 <= 0.0)
        throw validation_error("a powered load needs a positive rated (initial) amplitude");
    if (scn.controller.T_sample < scn.dt)
        throw validation_error("T_sample below the integration step");
    if (scn.params.R_line != 0.0 || scn.params.L_line != 0.0)
        throw validation_error("time-domain runs support only directly attached loads "
                               "(line impedance must be zero; steady-state checks accept it)");
    double prev = -1.0;
    for (const Event& ev : scn.events) {
        if (ev.t < 0.0 || ev.t > scn.t_end)
            throw validation_error("event at t=" + std::to_string(ev.t) +
                                   " outside [0, t_end]");
        if (ev.t < prev) throw validation_error("events must be sorted by time");
        prev = ev.t;
        switch (ev.kind) {
            case Event::Kind::set_vdc:
                if (!(ev.a > 0.0)) throw validation_error("set_vdc payload must be positive");
                break;
            case Event::Kind::set_vref_amp:
                if (ev.a < 0.0)
                    throw validation_error("set_vref_amp payload must be non-negative");
                break;
            case Event::Kind::set_load:
                if (ev.a < 0.0) throw validation_error("set_load P must be non-negative");
                break;
        }
    }
}

void resolve_controller_defaults(Scenario& scn) {
    if (scn.controller.lambda <= 0.0) scn.controller.lambda = scn.params.f_sw / 10.0;
    if (scn.controller.Bound <= 0.0) {
        double worst_rhs = 0.0;
        if (scn.vref_amp0 > 0.0) {
            LoadSpec load0 =
                build_load_from_power(scn.P0, scn.Q0, scn.vref_amp0, scn.omega());
            worst_rhs = steady_state_worst_case(scn.vref_amp0, load0, scn.omega(), scn.params) /
                        scn.params.lc();
        }
        scn.controller.Bound = min_bound_estimate(scn.controller.T_sample,
                                                  scn.controller.T_delay, scn.v_dc0, worst_rhs,
                                                  scn.params);
    }
}

void reseat_load_states(CircuitState& state, const LoadSpec& load) {
    state.i_o = load.conductance() * state.u_o;
    // capacitive branch joins pre-charged to the node voltage, so no inrush;
    // an inductive branch joins with zero current
    state.i_load_aux = load.Q < 0.0 ? state.u_o : 0.0;
}

namespace {

StateDerivs eval(const CircuitState& s, double u_o, double i_L, double i_o, double aux,
                 const SwitchCommand& cmd, const CircuitParams& p, const LoadSpec& load) {
    CircuitState tmp = s;
    tmp.u_o = u_o;
    tmp.i_L = i_L;
    tmp.i_o = i_o;
    tmp.i_load_aux = aux;
    return state_derivatives(tmp, cmd, p, load);
}

}  // namespace

CircuitState step(const CircuitState& state, const SwitchCommand& cmd, const LoadSpec& load,
                  const CircuitParams& params, double dt) {
    const StateDerivs k1 = state_derivatives(state, cmd, params, load);
    const StateDerivs k2 =
        eval(state, state.u_o + 0.5 * dt * k1.du_o, state.i_L + 0.5 * dt * k1.di_L,
             state.i_o + 0.5 * dt * k1.di_o, state.i_load_aux + 0.5 * dt * k1.di_load_aux, cmd,
             params, load);
    const StateDerivs k3 =
        eval(state, state.u_o + 0.5 * dt * k2.du_o, state.i_L + 0.5 * dt * k2.di_L,
             state.i_o + 0.5 * dt * k2.di_o, state.i_load_aux + 0.5 * dt * k2.di_load_aux, cmd,
             params, load);
    const StateDerivs k4 =
        eval(state, state.u_o + dt * k3.du_o, state.i_L + dt * k3.di_L,
             state.i_o + dt * k3.di_o, state.i_load_aux + dt * k3.di_load_aux, cmd, params,
             load);
    CircuitState next = state;
    next.t = state.t + dt;
    next.u_o += dt / 6.0 * (k1.du_o + 2.0 * k2.du_o + 2.0 * k3.du_o + k4.du_o);
    next.i_L += dt / 6.0 * (k1.di_L + 2.0 * k2.di_L + 2.0 * k3.di_L + k4.di_L);
    next.i_o += dt / 6.0 * (k1.di_o + 2.0 * k2.di_o + 2.0 * k3.di_o + k4.di_o);
    next.i_load_aux +=
        dt / 6.0 * (k1.di_load_aux + 2.0 * k2.di_load_aux + 2.0 * k3.di_load_aux +
                    k4.di_load_aux);
    if (!std::isfinite(next.u_o) || !std::isfinite(next.i_L) || !std::isfinite(next.i_o) ||
        !std::isfinite(next.i_load_aux))
        throw simulation_diverged("integration produced a non-finite state at t=" +
                                      std::to_string(state.t),
                                  state.t);
    return next;
}

RunResult run(const Scenario& scn, const ControllerConfig& cfg, double record_dt) {
    validate_scenario(scn);
    validate_config(cfg);

    RunResult result;
    result.series.record_dt = record_dt;
    if (scn.t_end == 0.0) return result;

    const double dt = scn.dt;
    const long n = std::lround(scn.t_end / dt);
    const long sample_every = std::lround(cfg.T_sample / dt);
    const long rec_every = std::lround(record_dt / dt);
    if (sample_every < 1 || std::abs(sample_every * dt - cfg.T_sample) > 1e-12)
        throw validation_error("T_sample must be a multiple of dt");
    if (rec_every < 1 || std::abs(rec_every * dt - record_dt) > 1e-12)
        throw validation_error("record_dt must be a multiple of dt");

    const double omega = scn.omega();
    const double v_rated = scn.vref_amp0; // loads stay sized for the initial amplitude

    CircuitState state;
    state.v_dc = scn.v_dc0;
    LoadSpec load = build_load_from_power(scn.P0, scn.Q0, v_rated > 0.0 ? v_rated : 1.0, omega);
    reseat_load_states(state, load);
    ReferenceSignal ref{scn.vref_amp0, omega, 0.0};
    DemandPhasor demand = demand_phasor(ref.amplitude, load, omega, scn.params);

    SwitchState sw;
    TimeSeries& ts = result.series;
    const std::size_t nrec = static_cast<std::size_t>(n / rec_every) + 1;
    for (auto* col : {&ts.t, &ts.x_d, &ts.u_o, &ts.i_L, &ts.i_o, &ts.v_dc, &ts.T, &ts.s,
                      &ts.margin})
        col->reserve(nrec);
    ts.violated.reserve(nrec);

    std::size_t next_event = 0;
    for (long i = 0; i <= n; ++i) {
        const double t = i * dt;
        while (next_event < scn.events.size() && scn.events[next_event].t <= t + 1e-15) {
            const Event& ev = scn.events[next_event];
            switch (ev.kind) {
                case Event::Kind::set_vdc:
                    state.v_dc = ev.a;
                    break;
                case Event::Kind::set_vref_amp:
                    ref.amplitude = ev.a;
                    break;
                case Event::Kind::set_load:
                    load = build_load_from_power(ev.a, ev.b, v_rated > 0.0 ? v_rated : 1.0,
                                                 omega);
                    reseat_load_states(state, load);
                    break;
            }
            demand = demand_phasor(ref.amplitude, load, omega, scn.params);
            ++next_event;
        }
        state.t = t;

        const double x_dot = (state.i_L - state.i_o) / scn.params.C_f;
        const double s = sliding_surface(state.u_o, x_dot, ref, t, cfg.lambda);
        if (i % sample_every == 0) sw.sample(s, t, cfg);
        sw.poll(t);

        if (i % rec_every == 0) {
            // criterion of the demanded operating point: reference voltage plus
            // the load's steady-state current slope at the commanded amplitude
            const double demanded_sum = demand.V_eq * std::sin(omega * t + demand.phase);
            const double x_d = ref.x_d(t);
            const double di_o_demand = (demanded_sum - x_d) / scn.params.L_f;
            BoundaryVerdict verdict =
                instantaneous_criterion(x_d, di_o_demand, state.v_dc, scn.params);
            ts.t.push_back(t);
            ts.x_d.push_back(x_d);
            ts.u_o.push_back(state.u_o);
            ts.i_L.push_back(state.i_L);
            ts.i_o.push_back(state.i_o);
            ts.v_dc.push_back(state.v_dc);
            ts.T.push_back(sw.cmd.T);
            ts.s.push_back(s);
            ts.margin.push_back(verdict.margin);
            ts.violated.push_back(verdict.margin <= 0.0 ? 1 : 0);
        }
        if (i < n) state = step(state, sw.cmd, load, scn.params, dt);
    }
    result.metrics = metrics(ts, scn);
    return result;
}

std::vector<std::pair<double, double>> violation_intervals(const std::vector<double>& t,
                                                           const std::vector<double>& margin) {
    constexpr double kMergeGap = 20e-3; // one fundamental period
    constexpr double kMinRun = 1e-3;
    std::vector<std::pair<double, double>> runs;
    bool open = false;
    double start = 0.0, last = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (margin[i] <= 0.0) {
            if (!open) {
                open = true;
                start = t[i];
            }
            last = t[i];
        } else if (open) {
            runs.emplace_back(start, last);
            open = false;
        }
    }
    if (open) runs.emplace_back(start, last);

    std::vector<std::pair<double, double>> merged;
    for (const auto& r : runs) {
        if (!merged.empty() && r.first - merged.back().second < kMergeGap)
            merged.back().second = r.second;
        else
            merged.push_back(r);
    }
    std::vector<std::pair<double, double>> out;
    for (const auto& r : merged)
        if (r.second - r.first >= kMinRun) out.push_back(r);
    return out;
}

Metrics metrics(const TimeSeries& series, const Scenario& scn) {
    if (series.size() == 0) throw validation_error("metrics need a non-empty series");
    std::vector<double> edges{0.0};
    for (const Event& ev : scn.events)
        if (ev.t > edges.back() + 1e-12 && ev.t < scn.t_end - 1e-12) edges.push_back(ev.t);
    edges.push_back(scn.t_end);

    Metrics m;
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
        SegmentMetrics seg;
        seg.t_start = edges[e];
        seg.t_end = edges[e + 1];
        double sum2 = 0.0;
        std::size_t count = 0;
        long transitions = 0;
        double prev_T = 0.0;
        bool last_segment = (e + 2 == edges.size());
        for (std::size_t i = 0; i < series.size(); ++i) {
            double t = series.t[i];
            if (t < seg.t_start - 1e-15) continue;
            if (t > seg.t_end + 1e-15 || (!last_segment && t >= seg.t_end - 1e-15)) break;
            double err = series.u_o[i] - series.x_d[i];
            sum2 += err * err;
            seg.peak_error = std::max(seg.peak_error, std::abs(err));
            if (count > 0 && series.T[i] != prev_T) ++transitions;
            prev_T = series.T[i];
            ++count;
        }
        if (count > 0) seg.rms_error = std::sqrt(sum2 / static_cast<double>(count));
        double duration = seg.t_end - seg.t_start;
        // exact when record_dt <= T_sample (every commutation lands on a record)
        if (duration > 0.0) seg.mean_fsw = static_cast<double>(transitions) / (2.0 * duration);
        m.segments.push_back(seg);
    }
    m.intervals = violation_intervals(series.t, series.margin);
    return m;
}

}  // namespace gridform
