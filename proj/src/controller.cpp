#include "gridform/controller.hpp"

#include <cmath>
#include <limits>

#include "gridform/errors.hpp"

namespace gridform {

void validate_config(const ControllerConfig& cfg) {
    if (!(cfg.lambda > 0.0)) throw validation_error("lambda must be positive");
    if (!(cfg.Bound > 0.0)) throw validation_error("Bound must be positive");
    if (!(cfg.T_sample > 0.0)) throw validation_error("T_sample must be positive");
    if (cfg.T_delay < 0.0) throw validation_error("T_delay must be non-negative");
    if (cfg.max_hold < 0.0) throw validation_error("max_hold must be non-negative");
}

ControllerConfig config_from_params(const CircuitParams& params) {
    ControllerConfig cfg;
    cfg.lambda = params.f_sw / 10.0;
    return cfg;
}

double ReferenceSignal::x_d(double t) const { return amplitude * std::sin(omega * t + phase); }
double ReferenceSignal::x_d_dot(double t) const {
    return amplitude * omega * std::cos(omega * t + phase);
}
double ReferenceSignal::x_d_ddot(double t) const {
    return -amplitude * omega * omega * std::sin(omega * t + phase);
}

TrackingSample make_tracking_sample(double x, double x_dot, const ReferenceSignal& ref,
                                    double t, double lambda) {
    TrackingSample ts;
    ts.x = x;
    ts.x_dot = x_dot;
    ts.x_tilde = x - ref.x_d(t);
    ts.x_tilde_dot = x_dot - ref.x_d_dot(t);
    ts.s = ts.x_tilde_dot + lambda * ts.x_tilde;
    return ts;
}

double sliding_surface(double x, double x_dot, const ReferenceSignal& ref, double t,
                       double lambda) {
    return (x_dot - ref.x_d_dot(t)) + lambda * (x - ref.x_d(t));
}

SwitchCommand hysteresis_decision(double s, const ControllerConfig& cfg,
                                  const SwitchCommand& prev) {
    if (s > cfg.Bound) return SwitchCommand{-1.0};
    if (s < -cfg.Bound) return SwitchCommand{+1.0};
    return prev;
}

void SwitchState::sample(double s, double t, const ControllerConfig& cfg) {
    if (pending) {
        ++held_samples;
        return; // one command in flight at a time
    }
    SwitchCommand next = hysteresis_decision(s, cfg, cmd);
    if (next.T == cmd.T && cfg.max_hold > 0.0) {
        int ceiling = static_cast<int>(std::lround(cfg.max_hold / cfg.T_sample));
        if (ceiling > 0 && held_samples >= ceiling) next.T = -cmd.T;
    }
    if (next.T != cmd.T) {
        if (cfg.T_delay <= 0.0) {
            cmd = next;
            held_samples = 0;
            ++flips;
        } else {
            pending = true;
            pending_cmd = next;
            apply_at = t + cfg.T_delay;
            ++held_samples;
        }
    } else {
        ++held_samples;
    }
}

void SwitchState::poll(double t) {
    if (pending && t + 1e-15 >= apply_at) {
        cmd = pending_cmd;
        pending = false;
        held_samples = 0;
        ++flips;
    }
}

SurfaceRate s_dot_decomposition(const CircuitState& state, const LoadSpec& load,
                                const ReferenceSignal& ref, const ControllerConfig& cfg,
                                const CircuitParams& params, const SwitchCommand& cmd) {
    StateDerivs d = state_derivatives(state, cmd, params, load);
    SurfaceRate r;
    r.f_term = -state.u_o / params.lc() - d.di_o / params.C_f;
    double x_dot = (state.i_L - state.i_o) / params.C_f;
    double x_tilde_dot = x_dot - ref.x_d_dot(state.t);
    r.feed_terms = -ref.x_d_ddot(state.t) + cfg.lambda * x_tilde_dot;
    r.u_term = equivalent_control_input(cmd, state.v_dc, params);
    return r;
}

std::vector<double> reconstruct_error(const std::vector<double>& s_series, double dt,
                                      double x_tilde_0, double lambda) {
    if (s_series.empty()) throw validation_error("cannot reconstruct from an empty s series");
    if (!(dt > 0.0) || !(lambda > 0.0))
        throw validation_error("reconstruction needs dt > 0 and lambda > 0");
    std::vector<double> x(s_series.size());
    x[0] = x_tilde_0;
    // x[i] = e^{-l h} x[i-1] + trapezoid of s e^{l tau} over one step, with the
    // common e^{-l t_i} factor pulled inside so nothing overflows.
    double decay = std::exp(-lambda * dt);
    for (std::size_t i = 1; i < s_series.size(); ++i)
        x[i] = x[i - 1] * decay + 0.5 * dt * (s_series[i - 1] * decay + s_series[i]);
    return x;
}

}  // namespace gridform
