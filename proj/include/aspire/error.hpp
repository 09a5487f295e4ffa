#pragma once

#include <stdexcept>
#include <string>

namespace aspire {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument violated a documented precondition (control limits, covariance shape, ...).
class InvalidInput : public Error {
public:
    using Error::Error;
};

/// Geometry for which a quantity is undefined, e.g. bearing between coincident points.
class DegenerateGeometry : public Error {
public:
    using Error::Error;
};

/// Bayes update whose total likelihood is zero.
class DegenerateUpdate : public Error {
public:
    using Error::Error;
};

/// No collision-free motion primitive exists at the current robot pose.
class PlanningInfeasible : public Error {
public:
    using Error::Error;
};

/// Scenario configuration could not be parsed or failed validation.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace aspire
