#pragma once

#include <cstddef>
#include <vector>

#include "gridform/circuit.hpp"

namespace gridform {

// Sampled hysteresis-band relay on the sliding surface s = x_tilde_dot +
// lambda*x_tilde. Bound is the half-width of the band on s; T_sample the
// controller sampling period; T_delay an optional actuation delay.
//
// max_hold is a commutation ceiling: if the relay has held one polarity that
// long, the state machine forces a flip even inside the band. Without it, the
// series resonance of L_f with a large capacitive load bank (~76 Hz with the
// default values) fits inside the band and survives as a relay-sustained
// limit cycle; the ceiling dithers it away and never engages during healthy
// switching (natural flips come every few microseconds). 0 disables it.
struct ControllerConfig {
    double lambda = 2000.0;  // surface pole (1/s)
    double Bound = 0.0;      // hysteresis half-width on s (V/s)
    double T_sample = 1e-6;  // sampling period (s)
    double T_delay = 0.0;    // actuation delay (s)
    double max_hold = 50e-6; // forced-commutation ceiling (s), 0 = off
};

void validate_config(const ControllerConfig& cfg);

// lambda = f_sw/10 is the design rule tying the surface pole to the switching
// frequency.
ControllerConfig config_from_params(const CircuitParams& params);

// Sinusoidal voltage reference x_d(t) = amplitude * sin(omega*t + phase),
// with analytic derivatives.
struct ReferenceSignal {
    double amplitude = 0.0; // peak volts
    double omega = 0.0;     // rad/s
    double phase = 0.0;     // rad

    double x_d(double t) const;
    double x_d_dot(double t) const;
    double x_d_ddot(double t) const;
};

// One controller-side measurement: tracking error and surface value.
struct TrackingSample {
    double x = 0.0;
    double x_dot = 0.0;
    double x_tilde = 0.0;
    double x_tilde_dot = 0.0;
    double s = 0.0;
};

TrackingSample make_tracking_sample(double x, double x_dot, const ReferenceSignal& ref,
                                    double t, double lambda);

// s = (x_dot - x_d_dot) + lambda*(x - x_d)
double sliding_surface(double x, double x_dot, const ReferenceSignal& ref, double t,
                       double lambda);

// The relay decision proper: s above the band drives T = -1 (to pull s_dot
// negative), below the band T = +1, inside the band hold. Ties at |s| == Bound
// hold the previous command.
SwitchCommand hysteresis_decision(double s, const ControllerConfig& cfg,
                                  const SwitchCommand& prev);

// Sampled relay + delay + commutation ceiling as a small value-type state
// machine, advanced by the simulation loop at every controller sample instant.
struct SwitchState {
    SwitchCommand cmd{+1.0};
    int held_samples = 0;       // samples since the command last changed
    bool pending = false;       // a delayed command is in flight
    SwitchCommand pending_cmd{+1.0};
    double apply_at = 0.0;

    // Called at each sample instant (time t). Returns the command to apply
    // for the next interval once any in-flight delay has elapsed.
    void sample(double s, double t, const ControllerConfig& cfg);
    // Called every integration step so a delayed command lands on time.
    void poll(double t);
    // Number of polarity flips applied so far.
    long flips = 0;
};

// The three addends of s_dot: the plant term f = -u_o/(L_f C_f) -
// (1/C_f) di_o/dt, the reference/surface feed -x_d_ddot + lambda*x_tilde_dot,
// and the switched input u = T*v_dc/(L_f C_f). Their sum is s_dot.
struct SurfaceRate {
    double f_term = 0.0;
    double feed_terms = 0.0;
    double u_term = 0.0;
    double total() const { return f_term + feed_terms + u_term; }
};

SurfaceRate s_dot_decomposition(const CircuitState& state, const LoadSpec& load,
                                const ReferenceSignal& ref, const ControllerConfig& cfg,
                                const CircuitParams& params, const SwitchCommand& cmd);

// Reconstructs x_tilde(t) from a uniformly sampled s series:
//   x_tilde(t) = e^{-lambda t} [ x_tilde(t0) e^{lambda t0} + integral s e^{lambda tau} dtau ]
// evaluated by trapezoidal quadrature in a numerically stable recursive form
// (no large exponentials). Inverse of the surface definition; used as a
// self-consistency oracle on recorded runs. Throws validation_error on an
// empty series.
std::vector<double> reconstruct_error(const std::vector<double>& s_series, double dt,
                                      double x_tilde_0, double lambda);

}  // namespace gridform
