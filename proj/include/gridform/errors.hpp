#pragma once

#include <stdexcept>
#include <string>

namespace gridform {

// Bad user input: malformed scenario text, out-of-range parameters, impossible
// configuration. Maps to process exit code 2 in the CLI.
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// The integrator produced a non-finite state. Carries the last good time so the
// caller can report where the run died. Maps to exit code 3 in the CLI.
struct simulation_diverged : std::runtime_error {
    double t_last;
    simulation_diverged(const std::string& msg, double t)
        : std::runtime_error(msg), t_last(t) {}
};

}  // namespace gridform
