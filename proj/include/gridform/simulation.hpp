#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gridform/boundary.hpp"
#include "gridform/circuit.hpp"
#include "gridform/controller.hpp"

namespace gridform {

struct Event {
    enum class Kind { set_vdc, set_vref_amp, set_load };
    double t = 0.0;
    Kind kind = Kind::set_vdc;
    double a = 0.0; // V for set_vdc/set_vref_amp, P for set_load
    double b = 0.0; // Q for set_load
};

// Initial conditions, plant/controller parameters and the event script of one
// experiment. Loads are synthesized at the initial reference amplitude (the
// rated voltage); later amplitude events rescale the reference only, keeping
// the load a constant impedance.
struct Scenario {
    CircuitParams params{};
    ControllerConfig controller{};
    double v_dc0 = 250.0;
    double vref_amp0 = 120.0;
    double P0 = 0.0;
    double Q0 = 0.0;
    double f_grid = 50.0;
    double t_end = 1.0;
    double dt = 0.5e-6;
    std::vector<Event> events;

    double omega() const { return 2.0 * M_PI * f_grid; }
};

// Checks the scenario invariants: dt resolves the switching period at least
// 20 times, events lie inside [0, t_end] sorted by time, payloads physical.
void validate_scenario(const Scenario& scn);

// Fills in the derived controller fields a scenario file may omit: lambda from
// f_sw/10 and Bound from min_bound_estimate at the initial operating point
// (v_dc0 plus the initial load's steady-state demand).
void resolve_controller_defaults(Scenario& scn);

// Uniformly decimated record of a run. margin/violated refer to the demanded
// operating point at that instant: the criterion is evaluated for the
// reference trajectory and the load's steady-state current demand at the
// commanded amplitude, not for the sagging plant state — a saturated plant
// never demands more than the dc link can deliver, so the demanded operating
// point is what actually signals the violation.
struct TimeSeries {
    double record_dt = 10e-6;
    std::vector<double> t, x_d, u_o, i_L, i_o, v_dc, T, s, margin;
    std::vector<std::uint8_t> violated;

    std::size_t size() const { return t.size(); }
};

struct SegmentMetrics {
    double t_start = 0.0;
    double t_end = 0.0;
    double rms_error = 0.0;  // RMS of u_o - x_d over the segment (V)
    double peak_error = 0.0; // max |u_o - x_d| (V)
    double mean_fsw = 0.0;   // polarity transitions / (2 * duration) (Hz)
};

struct Metrics {
    std::vector<SegmentMetrics> segments; // partition of [0, t_end] at event times
    std::vector<std::pair<double, double>> intervals; // violation episodes
};

struct RunResult {
    TimeSeries series;
    Metrics metrics;
};

// One classical 4th-order step with the switch command held constant.
// Throws simulation_diverged if the result is non-finite.
CircuitState step(const CircuitState& state, const SwitchCommand& cmd, const LoadSpec& load,
                  const CircuitParams& params, double dt);

// Fixed-step loop: apply due events, sample the controller every T_sample,
// integrate, record every record_dt. record_dt must be a multiple of dt.
RunResult run(const Scenario& scn, const ControllerConfig& cfg, double record_dt = 10e-6);

// Maximal runs of margin <= 0. Runs separated by less than one fundamental
// period (20 ms) belong to the same violation episode — the criterion crosses
// twice per cycle while a violation lasts — and are merged; afterwards runs
// shorter than 1 ms are dropped as edge chatter.
std::vector<std::pair<double, double>> violation_intervals(const std::vector<double>& t,
                                                           const std::vector<double>& margin);

// Per-segment RMS/peak tracking error and mean switching frequency, plus the
// violation intervals, from a recorded series. Throws on an empty series.
Metrics metrics(const TimeSeries& series, const Scenario& scn);

// Branch state re-seeding when a load is (re)attached at node voltage u_o:
// the node state (u_o, i_L) is continuous, the new branch starts unexcited
// (inductor current 0, load capacitor pre-charged to u_o) so i_o = G*u_o.
void reseat_load_states(CircuitState& state, const LoadSpec& load);

}  // namespace gridform
