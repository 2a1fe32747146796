#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridform/simulation.hpp"

namespace gridform {

inline constexpr const char* kToolVersion = "gridform 1.0.0";

// Line-based scenario format, one directive per line, '#' starts a comment:
//   param <name> <number>     name in {L_f, C_f, f_sw, f_grid, t_end, dt,
//                             lambda, bound, t_sample, t_delay, max_hold}
//   init vdc <V> | init vref_amp <V> | init load P=<W> Q=<VAr>
//   event <t> set_vdc <V> | set_vref_amp <V> | set_load P=<W> Q=<VAr>
// Q signed: positive inductive, negative capacitive. Events are sorted by
// time, ties keeping file order. Unknown directives, duplicate param keys and
// invariant violations raise validation_error with the line number. lambda
// and bound given as 0 (or omitted) derive their defaults (f_sw/10 and the
// minimum feasible band at the initial operating point); the returned
// scenario is fully resolved.
struct ParsedScenario {
    Scenario scenario;
    std::vector<std::string> defaulted; // parameter keys filled from defaults
};

ParsedScenario parse_scenario(const std::string& text);

// Canonical text for a scenario; parse(serialize(s)) == s.
std::string serialize_scenario(const Scenario& scn);

// CSV with header t,x_d,u_o,i_L,i_o,v_dc,T,s,margin,violated; 9 significant
// digits; violated as 0/1. Throws validation_error on I/O failure (message
// carries the path).
void write_timeseries(const TimeSeries& series, const std::string& path);
std::string timeseries_csv(const TimeSeries& series);

// Flat "<key> = <value>" manifest: tool version, input digest, every resolved
// parameter, the event list and the metrics summary, in stable key order.
// "timestamp" is the only volatile key.
void write_manifest(const Scenario& scn, const ControllerConfig& cfg, const Metrics& m,
                    const std::string& input_digest, const std::string& path);
std::string manifest_text(const Scenario& scn, const ControllerConfig& cfg, const Metrics& m,
                          const std::string& input_digest);

// Rebuilds scenario text from the params/init/events subset of a manifest, so
// a manifest alone reproduces its run.
std::string scenario_text_from_manifest(const std::string& manifest);

// FNV-1a 64-bit content digest, printed as 16 hex digits.
std::string fnv1a64_hex(const std::string& bytes);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace gridform
