#pragma once

#include <stdexcept>
#include <string>

namespace uavwpt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad or missing configuration, unknown keys, malformed input files.
struct ConfigError : Error {
    using Error::Error;
};

// Mission cannot be flown: flight time alone exceeds the horizon.
struct InfeasibleError : Error {
    using Error::Error;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

struct BracketError : Error {
    using Error::Error;
};

struct AccuracyError : Error {
    using Error::Error;
};

struct IndexError : Error {
    using Error::Error;
};

// Grouping or spacing rules cannot be met.
struct PlanError : Error {
    using Error::Error;
};

}  // namespace uavwpt
