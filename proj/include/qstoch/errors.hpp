#pragma once

#include <stdexcept>
#include <string>

namespace qstoch {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotHermitian : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

class InvalidInterval : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class Singular : public Error {
public:
    using Error::Error;
};

class QuadratureFailure : public Error {
public:
    using Error::Error;
};

class UnsupportedDimension : public Error {
public:
    using Error::Error;
};

class DegenerateBeta : public Error {
public:
    using Error::Error;
};

class DegenerateHamiltonian : public Error {
public:
    using Error::Error;
};

class DegenerateCoupling : public Error {
public:
    using Error::Error;
};

class BasisMismatch : public Error {
public:
    using Error::Error;
};

// Raised when a matrix that must be positive semidefinite is not. When the
// failure comes from the trace-preservation window of a stochastic model, the
// offending time and, if it could be located, the first crossing time are
// attached.
class NotPositive : public Error {
public:
    NotPositive(const std::string& what, double min_eigenvalue,
                double time = -1.0, double crossing_time = -1.0)
        : Error(what), min_eigenvalue_(min_eigenvalue), time_(time),
          crossing_time_(crossing_time) {}

    double min_eigenvalue() const noexcept { return min_eigenvalue_; }
    // Negative when not associated with a time.
    double time() const noexcept { return time_; }
    // Negative when no crossing was located.
    double crossing_time() const noexcept { return crossing_time_; }

private:
    double min_eigenvalue_;
    double time_;
    double crossing_time_;
};

}  // namespace qstoch
