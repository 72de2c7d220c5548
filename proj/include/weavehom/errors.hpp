#pragma once

#include <stdexcept>
#include <string>

namespace weavehom {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Out-of-range physical or discretization parameter.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Degenerate or inconsistent geometry (non-positive Jacobian, broken pairing).
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Mesh resolution too coarse to represent a required feature.
class RefinementError : public GeometryError {
public:
    using GeometryError::GeometryError;
};

/// Violated precondition of an operation (caller bug, not bad data).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Iterative or direct solver failure.
class SolverError : public Error {
public:
    SolverError(const std::string &what, double final_residual = -1.0)
        : Error(what), final_residual_(final_residual) {}
    double final_residual() const { return final_residual_; }

private:
    double final_residual_;
};

/// Configuration file or command line rejected.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace weavehom
