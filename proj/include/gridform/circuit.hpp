#pragma once

#include <cmath>

namespace gridform {

// Single-phase H-bridge with LC output filter. The bridge applies T*v_dc
// (T = +/-1) across L_f; the filter capacitor C_f defines the output node u_o
// that the controller regulates. f_sw is the designed nominal switching
// frequency; a = f_sw / f_resonance is the filter design ratio and must stay
// >= 10 so the switching ripple sits well above the LC resonance.
struct CircuitParams {
    double L_f = 0.5e-3;   // filter inductance (H)
    double C_f = 20e-6;    // filter capacitance (F)
    double f_sw = 20e3;    // designed nominal switching frequency (Hz)
    double a = 4.0 * M_PI; // f_sw * 2*pi*sqrt(L_f*C_f), dimensionless
    double R_line = 0.0;   // series line resistance (ohm), 0 = load at the filter cap
    double L_line = 0.0;   // series line inductance (H)

    double lc() const { return L_f * C_f; }
};

// Derives the design ratio from f_sw (or validates a supplied one) and checks
// the physical invariants. Throws validation_error on violation.
CircuitParams make_params(double L_f, double C_f, double f_sw);
void validate_params(const CircuitParams& p);

// Bipolar switch command. The bridge has no freewheeling third level here:
// T is exactly -1 or +1.
struct SwitchCommand {
    double T = +1.0;
};

// Instantaneous electrical state. i_load_aux is the internal state of the
// reactive load branch: the branch inductor current (A) for an inductive
// load, or the load-capacitor voltage (V) for a capacitive one.
struct CircuitState {
    double t = 0.0;
    double u_o = 0.0;        // output/capacitor voltage (V)
    double i_L = 0.0;        // filter inductor current (A)
    double i_o = 0.0;        // total load current leaving the output node (A)
    double i_load_aux = 0.0; // reactive-branch state (A or V, see LoadSpec)
    double v_dc = 0.0;       // dc-link voltage (V), exogenous
};

// Constant-impedance load synthesized from a power setpoint at rated voltage:
// a resistive branch R_load in parallel with one reactive branch whose
// reactance magnitude is X_mag. Q > 0 means inductive (lagging), Q < 0
// capacitive. P = 0 or Q = 0 leaves the respective branch open.
struct LoadSpec {
    double P = 0.0;            // active power at rated voltage (W)
    double Q = 0.0;            // reactive power, signed (VAr)
    double V_rated_peak = 0.0; // rated peak voltage the load was sized for (V)
    double omega = 0.0;        // angular grid frequency (rad/s)
    double R_load = 0.0;       // derived, valid when P > 0
    double X_mag = 0.0;        // derived reactance magnitude, valid when Q != 0

    bool has_resistive() const { return P > 0.0; }
    bool has_reactive() const { return Q != 0.0; }
    double conductance() const { return has_resistive() ? 1.0 / R_load : 0.0; }
    double L_load() const { return X_mag / omega; }       // Q > 0 only
    double C_load() const { return 1.0 / (omega * X_mag); } // Q < 0 only
};

LoadSpec build_load_from_power(double P, double Q, double V_rated_peak, double omega);

// A multi-millifarad capacitive branch cannot hang directly on the 20 uF
// filter node: it would swallow the switched drive entirely (the effective
// gain drops by C_f/(C_f+C_load) ~ 1/440 and the relay degenerates to ~80 Hz).
// Physically such a bank connects through feeder/ESL impedance anyway, so the
// capacitive branch is attached behind a small fixed series impedance. Values
// are sized to keep the delivered (P, Q) within 2% of the setpoint at rated
// voltage and the steady-state phasor within 5% of the ideal parallel model.
inline constexpr double kCapBranchSeriesR = 1e-3;  // ohm
inline constexpr double kCapBranchSeriesL = 20e-6; // H

// Time derivative of the electrical state (t and v_dc excluded: time advances
// by integration, v_dc is an input).
struct StateDerivs {
    double du_o = 0.0;
    double di_L = 0.0;
    double di_o = 0.0;
    double di_load_aux = 0.0;
};

//   d i_L/dt = (T*v_dc - u_o)/L_f
//   d u_o/dt = (i_L - i_o)/C_f
// plus the load-branch ODE that closes i_o. The resistive branch is algebraic
// (i_R = u_o/R_load, so its current derivative rides on du_o/dt); the reactive
// branch contributes through i_load_aux.
StateDerivs state_derivatives(const CircuitState& state, const SwitchCommand& cmd,
                              const CircuitParams& params, const LoadSpec& load);

// The switched forcing term of the output-voltage dynamics:
//   d2u_o/dt2 = -u_o/(L_f C_f) - (1/C_f) di_o/dt + u,  u = T*v_dc/(L_f C_f)
double equivalent_control_input(const SwitchCommand& cmd, double v_dc,
                                const CircuitParams& params);

}  // namespace gridform
