#include "gridform/circuit.hpp"

#include <cmath>
#include <string>

#include "gridform/errors.hpp"

namespace gridform {

CircuitParams make_params(double L_f, double C_f, double f_sw) {
    CircuitParams p;
    p.L_f = L_f;
    p.C_f = C_f;
    p.f_sw = f_sw;
    p.a = f_sw * 2.0 * M_PI * std::sqrt(L_f * C_f);
    validate_params(p);
    return p;
}

void validate_params(const CircuitParams& p) {
    if (!(p.L_f > 0.0) || !(p.C_f > 0.0) || !(p.f_sw > 0.0))
        throw validation_error("circuit parameters must be positive (L_f=" +
                               std::to_string(p.L_f) + ", C_f=" + std::to_string(p.C_f) +
                               ", f_sw=" + std::to_string(p.f_sw) + ")");
    double f_res = 1.0 / (2.0 * M_PI * std::sqrt(p.L_f * p.C_f));
    double a = p.f_sw / f_res;
    if (std::abs(a - p.a) > 1e-9 * a)
        throw validation_error("design ratio a=" + std::to_string(p.a) +
                               " inconsistent with f_sw/f_res=" + std::to_string(a));
    if (a < 10.0)
        throw validation_error("filter design ratio a=" + std::to_string(a) +
                               " below 10: switching too close to LC resonance");
    if (p.R_line < 0.0 || p.L_line < 0.0)
        throw validation_error("line impedance must be non-negative");
}

LoadSpec build_load_from_power(double P, double Q, double V_rated_peak, double omega) {
    if (!std::isfinite(V_rated_peak) || !std::isfinite(omega) || V_rated_peak <= 0.0 ||
        omega <= 0.0)
        throw validation_error("load synthesis needs positive finite rated voltage and omega");
    if (!std::isfinite(P) || !std::isfinite(Q) || P < 0.0)
        throw validation_error("load synthesis needs finite P >= 0 and finite Q");
    LoadSpec load;
    load.P = P;
    load.Q = Q;
    load.V_rated_peak = V_rated_peak;
    load.omega = omega;
    double s_rated = V_rated_peak * V_rated_peak / 2.0; // V_rms^2
    if (P > 0.0) load.R_load = s_rated / P;
    if (Q != 0.0) load.X_mag = s_rated / std::abs(Q);
    return load;
}

StateDerivs state_derivatives(const CircuitState& state, const SwitchCommand& cmd,
                              const CircuitParams& params, const LoadSpec& load) {
    StateDerivs d;
    d.du_o = (state.i_L - state.i_o) / params.C_f;
    d.di_L = (cmd.T * state.v_dc - state.u_o) / params.L_f;
    double G = load.conductance();
    if (load.Q > 0.0) {
        // i_load_aux is the branch inductor current; the branch sees u_o directly
        d.di_load_aux = state.u_o / load.L_load();
        d.di_o = G * d.du_o + d.di_load_aux;
    } else if (load.Q < 0.0) {
        // i_load_aux is the load-capacitor voltage; the branch current follows
        // from the node balance and drives both i_o and the capacitor.
        double i_branch = state.i_o - G * state.u_o;
        double di_branch =
            (state.u_o - kCapBranchSeriesR * i_branch - state.i_load_aux) / kCapBranchSeriesL;
        d.di_o = G * d.du_o + di_branch;
        d.di_load_aux = i_branch / load.C_load();
    } else if (load.has_resistive()) {
        d.di_o = G * d.du_o;
    }
    return d;
}

double equivalent_control_input(const SwitchCommand& cmd, double v_dc,
                                const CircuitParams& params) {
    return cmd.T * v_dc / params.lc();
}

}  // namespace gridform
