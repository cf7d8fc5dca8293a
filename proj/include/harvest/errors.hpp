#pragma once

#include <stdexcept>
#include <string>

namespace harvest {

// Caller-supplied value outside an operation's domain.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Rejected model, grid, or file configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Missing or unwritable file.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Time step above the stability bound without an explicit override.
class CflError : public std::runtime_error {
public:
    CflError(double dt, double bound)
        : std::runtime_error("time step " + std::to_string(dt) +
                             " exceeds the stability bound " + std::to_string(bound)),
          dt_(dt), bound_(bound) {}
    double dt() const { return dt_; }
    double bound() const { return bound_; }

private:
    double dt_;
    double bound_;
};

// Non-finite value produced during the backward sweep.
class NumericalError : public std::runtime_error {
public:
    NumericalError(long level, long node)
        : std::runtime_error("non-finite value at time level " + std::to_string(level) +
                             ", population node " + std::to_string(node)),
          level_(level), node_(node) {}
    long level() const { return level_; }
    long node() const { return node_; }

private:
    long level_;
    long node_;
};

}  // namespace harvest
