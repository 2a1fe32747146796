#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "gridform/circuit.hpp"
#include "gridform/controller.hpp"

namespace gridform {

// Controllability check: the bridge can force s_dot in either direction only
// while v_dc/(L_f C_f) exceeds |u_o/(L_f C_f) + (1/C_f) di_o/dt|. lhs/rhs are
// those two accelerations; margin their normalized gap.
struct BoundaryVerdict {
    double lhs = 0.0;     // v_dc/(L_f C_f)  (V/s^2)
    double rhs = 0.0;     // |u_o/(L_f C_f) + di_o_dt/C_f|  (V/s^2)
    double margin = 0.0;  // (lhs - rhs)/lhs
    bool satisfied = false;
};

BoundaryVerdict instantaneous_criterion(double u_o, double di_o_dt, double v_dc,
                                        const CircuitParams& params);

// Worst case over one fundamental cycle of |u_o + L_f di_o/dt| when the load
// sits in sinusoidal steady state at V_peak: returns |V + j w L_f I| with I
// the complex load-current phasor (peak convention). The criterion holds in
// steady state iff v_dc exceeds the returned voltage.
double steady_state_worst_case(double V_peak, const LoadSpec& load, double omega,
                               const CircuitParams& params);

// Same quantity with its phase: u_o + L_f di_o/dt = V_eq sin(w t + phase) for
// a reference V_peak sin(w t). The simulator uses this to evaluate the margin
// of the demanded operating point at each instant.
struct DemandPhasor {
    double V_eq = 0.0;
    double phase = 0.0;
};

DemandPhasor demand_phasor(double V_peak, const LoadSpec& load, double omega,
                           const CircuitParams& params);

// Smallest hysteresis band a sampled controller can enforce: the fastest
// possible |s_dot| times the total reaction latency.
double min_bound_estimate(double T_sample, double T_delay, double v_dc,
                          double worst_rhs, const CircuitParams& params);

// Parameters of the tracking-error envelope. During a boundary-violation
// window [t_0, t_0+dt_window] (J = 1) the error drifts at k*v_dc/(L_f C_f
// lambda); outside it the envelope is the band ripple Bound/lambda. k is an
// empirical drive fraction in (0,1).
struct EnvelopeParams {
    double k = 0.5;
    double dt_window = 0.0; // violation window duration (s)
    double t_0 = 0.0;       // violation onset (s)
    int J = 0;              // violation indicator, 0 or 1
    double H_b = 0.0;       // minimum enforceable band (V/s)
};

void validate_envelope_params(const EnvelopeParams& env, const ControllerConfig& cfg);

// Piecewise envelope prediction at the given time samples (all >= t_0).
// Throws validation_error when Bound < H_b (band below the hardware floor).
std::vector<double> error_envelope(const EnvelopeParams& env, const ControllerConfig& cfg,
                                   double v_dc, double x_at_t0, const CircuitParams& params,
                                   const std::vector<double>& t_samples);

// Safe-operating-area sweep: steady-state verdict for every (v_dc, V_peak,
// load) tuple, cells stored v_dc-major, then V_peak, then load.
struct SoaGrid {
    std::vector<double> v_dc_axis;
    std::vector<double> v_peak_axis;
    std::vector<std::pair<double, double>> load_axis; // (P, Q)
    std::vector<BoundaryVerdict> cells;
    std::vector<double> worst_case_V; // per cell, volt-equivalent rhs

    std::size_t index(std::size_t i_vdc, std::size_t i_vpk, std::size_t i_load) const {
        return (i_vdc * v_peak_axis.size() + i_vpk) * load_axis.size() + i_load;
    }
};

SoaGrid safe_operating_area(const std::vector<double>& v_dc_axis,
                            const std::vector<double>& v_peak_axis,
                            const std::vector<std::pair<double, double>>& load_axis,
                            double V_rated_peak, double omega, const CircuitParams& params);

}  // namespace gridform
