// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace pslab {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Inputs violate a structural invariant (bad prior, malformed rule, ...).
class ValidationError : public Error {
  public:
    explicit ValidationError(const std::string& what) : Error(what) {}
};

/// A file could not be parsed; message names the offending field.
class ParseError : public Error {
  public:
    explicit ParseError(const std::string& what) : Error(what) {}
};

/// Vector/matrix sizes do not line up.
class DimensionError : public Error {
  public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

/// A conditional expectation was requested for an event of zero mass.
class EmptyConditioningEvent : public Error {
  public:
    explicit EmptyConditioningEvent(const std::string& what) : Error(what) {}
};

/// An enumeration would exceed the configured size cap.
class CapExceeded : public Error {
  public:
    explicit CapExceeded(const std::string& what) : Error(what) {}
};

/// LP solver ran past its iteration budget (distinct from infeasibility).
class LpIterationLimit : public Error {
  public:
    explicit LpIterationLimit(const std::string& what) : Error(what) {}
};

/// LP solver produced a solution that failed its own numerical checks.
class LpNumericalError : public Error {
  public:
    explicit LpNumericalError(const std::string& what) : Error(what) {}
};

/// A sub-problem that must be solvable turned out infeasible.
class InfeasibleError : public Error {
  public:
    explicit InfeasibleError(const std::string& what) : Error(what) {}
};

}  // namespace pslab
