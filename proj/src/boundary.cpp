#include "gridform/boundary.hpp"

#include <cmath>
#include <complex>
#include <limits>

#include "gridform/errors.hpp"

namespace gridform {

BoundaryVerdict instantaneous_criterion(double u_o, double di_o_dt, double v_dc,
                                        const CircuitParams& params) {
    if (v_dc < 0.0) throw validation_error("v_dc must be non-negative");
    BoundaryVerdict v;
    v.lhs = v_dc / params.lc();
    v.rhs = std::abs(u_o / params.lc() + di_o_dt / params.C_f);
    v.satisfied = v.lhs > v.rhs;
    if (v.lhs > 0.0)
        v.margin = (v.lhs - v.rhs) / v.lhs;
    else
        v.margin = v.rhs > 0.0 ? -std::numeric_limits<double>::infinity() : 0.0;
    return v;
}

namespace {

// Complex load-current phasor per volt of node amplitude (peak convention).
std::complex<double> load_admittance(const LoadSpec& load, double omega) {
    std::complex<double> y(0.0, 0.0);
    if (load.has_resistive()) y += 1.0 / load.R_load;
    if (load.Q > 0.0) y += 1.0 / std::complex<double>(0.0, load.X_mag);
    if (load.Q < 0.0) y += std::complex<double>(0.0, omega * load.C_load());
    return y;
}

std::complex<double> demand_factor(const LoadSpec& load, double omega,
                                   const CircuitParams& params) {
    std::complex<double> y = load_admittance(load, omega);
    if (params.R_line != 0.0 || params.L_line != 0.0) {
        // load behind a series line: the current sees line + load impedance
        if (y != std::complex<double>(0.0, 0.0)) {
            std::complex<double> z_line(params.R_line, omega * params.L_line);
            y = 1.0 / (z_line + 1.0 / y);
        }
    }
    return 1.0 + std::complex<double>(0.0, omega * params.L_f) * y;
}

}  // namespace

double steady_state_worst_case(double V_peak, const LoadSpec& load, double omega,
                               const CircuitParams& params) {
    // factored as V_peak * |1 + j w L_f Y| so scaling in V_peak is exact
    return V_peak * std::abs(demand_factor(load, omega, params));
}

DemandPhasor demand_phasor(double V_peak, const LoadSpec& load, double omega,
                           const CircuitParams& params) {
    std::complex<double> f = demand_factor(load, omega, params);
    return DemandPhasor{V_peak * std::abs(f), std::arg(f)};
}

double min_bound_estimate(double T_sample, double T_delay, double v_dc, double worst_rhs,
                          const CircuitParams& params) {
    if (!(T_sample > 0.0)) throw validation_error("T_sample must be positive");
    if (T_delay < 0.0) throw validation_error("T_delay must be non-negative");
    return (v_dc / params.lc() + worst_rhs) * (T_sample + T_delay);
}

void validate_envelope_params(const EnvelopeParams& env, const ControllerConfig& cfg) {
    if (!(env.k > 0.0 && env.k < 1.0)) throw validation_error("k must lie in (0, 1)");
    if (env.dt_window < 0.0) throw validation_error("violation window must be non-negative");
    if (env.J != 0 && env.J != 1) throw validation_error("J must be 0 or 1");
    if (!(env.H_b > 0.0)) throw validation_error("H_b must be positive");
    if (cfg.Bound < env.H_b)
        throw validation_error("infeasible band: Bound " + std::to_string(cfg.Bound) +
                               " below the sampling floor H_b " + std::to_string(env.H_b));
}

std::vector<double> error_envelope(const EnvelopeParams& env, const ControllerConfig& cfg,
                                   double v_dc, double x_at_t0, const CircuitParams& params,
                                   const std::vector<double>& t_samples) {
    validate_envelope_params(env, cfg);
    double ripple = cfg.Bound / cfg.lambda;
    double slope = env.k * v_dc / (params.lc() * cfg.lambda);
    std::vector<double> out;
    out.reserve(t_samples.size());
    for (double t : t_samples) {
        if (t < env.t_0)
            throw validation_error("envelope samples must not precede the window onset");
        if (env.J == 1 && t <= env.t_0 + env.dt_window)
            out.push_back(std::abs(x_at_t0) + slope * (t - env.t_0));
        else
            out.push_back(ripple);
    }
    return out;
}

SoaGrid safe_operating_area(const std::vector<double>& v_dc_axis,
                            const std::vector<double>& v_peak_axis,
                            const std::vector<std::pair<double, double>>& load_axis,
                            double V_rated_peak, double omega, const CircuitParams& params) {
    if (v_dc_axis.empty() || v_peak_axis.empty() || load_axis.empty())
        throw validation_error("safe-operating-area axes must be non-empty");
    for (double v : v_dc_axis)
        if (!(v > 0.0)) throw validation_error("v_dc axis values must be positive");
    for (double v : v_peak_axis)
        if (!(v > 0.0)) throw validation_error("V_peak axis values must be positive");

    SoaGrid grid;
    grid.v_dc_axis = v_dc_axis;
    grid.v_peak_axis = v_peak_axis;
    grid.load_axis = load_axis;
    grid.cells.resize(v_dc_axis.size() * v_peak_axis.size() * load_axis.size());
    grid.worst_case_V.resize(grid.cells.size());
    for (std::size_t i = 0; i < v_dc_axis.size(); ++i) {
        for (std::size_t j = 0; j < v_peak_axis.size(); ++j) {
            for (std::size_t k = 0; k < load_axis.size(); ++k) {
                LoadSpec load = build_load_from_power(load_axis[k].first, load_axis[k].second,
                                                      V_rated_peak, omega);
                double worst = steady_state_worst_case(v_peak_axis[j], load, omega, params);
                std::size_t idx = grid.index(i, j, k);
                grid.worst_case_V[idx] = worst;
                // same verdict as the instantaneous criterion at the cycle peak
                grid.cells[idx] = instantaneous_criterion(worst, 0.0, v_dc_axis[i], params);
            }
        }
    }
    return grid;
}

}  // namespace gridform
