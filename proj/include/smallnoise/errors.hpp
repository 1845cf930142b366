#pragma once

#include <stdexcept>
#include <string>

namespace smallnoise {

// Malformed or inconsistent run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A model coefficient failed a regularity check (non-finite evaluation,
// bound violation discovered outside validate_model's report path).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Argument outside the mathematically admissible range (epsilon >= 1,
// rho <= 1, negative moment order, ...).
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Kernel window would leave [0, T]; shrink the bandwidth or the eval window.
struct BoundaryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// State value too close to zero to divide by.
struct DegenerateStateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Derivative order beyond the declared smoothness class.
struct UnsupportedOrderError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Moment system for a kernel could not be solved.
struct KernelConstructionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A simulated path left the admissible range (|X| > overflow guard).
struct SimulationDivergedError : std::runtime_error {
    long step_index;
    long replicate_index;  // -1 when not simulated as part of an ensemble

    SimulationDivergedError(const std::string& msg, long step, long replicate = -1)
        : std::runtime_error(msg), step_index(step), replicate_index(replicate) {}
};

}  // namespace smallnoise
