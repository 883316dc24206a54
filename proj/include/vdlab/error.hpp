#pragma once

#include <stdexcept>
#include <string>

namespace vdlab {

// Base class for every error the library raises.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad grid, bad parameters, mismatched fields.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// NaN/Inf in an input sample, overflow, density below the floor.
class NumericalError : public Error {
public:
    using Error::Error;
};

// The field equations are singular somewhere on the requested domain.
class SingularDomain : public Error {
public:
    using Error::Error;
};

// Configuration file or CLI override problems.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace vdlab
