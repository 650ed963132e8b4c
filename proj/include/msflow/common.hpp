#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace msflow {

// Error hierarchy. Every failure mode carries a message; callers that can
// recover (step rejection) catch the specific type.

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class AdmissibilityError : public Error {
public:
    AdmissibilityError(double max_abs, double bound)
        : Error("height field inadmissible: max|h| = " + std::to_string(max_abs) +
                " >= " + std::to_string(bound)),
          max_abs_(max_abs), bound_(bound) {}
    double max_abs() const { return max_abs_; }
    double bound() const { return bound_; }
private:
    double max_abs_, bound_;
};

class DegenerateMapError : public Error {
public:
    using Error::Error;
};

class SolverError : public Error {
public:
    using Error::Error;
};

class InconsistentFieldError : public Error {
public:
    using Error::Error;
};

class StepRejectedError : public Error {
public:
    StepRejectedError(double max_abs, double gate)
        : Error("step rejected: max|h| = " + std::to_string(max_abs) +
                " exceeds safety gate " + std::to_string(gate)),
          max_abs_(max_abs), gate_(gate) {}
    double max_abs() const { return max_abs_; }
    double gate() const { return gate_; }
private:
    double max_abs_, gate_;
};

class SimulationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Full-precision scientific formatting; output files must not quantize.
inline std::string full_precision(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17e", x);
    return buf;
}

} // namespace msflow
