#pragma once

#include <stdexcept>
#include <string>

namespace terra {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument or configuration value was violated.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// An iterative solve (sinkage bisection, Cholesky jitter escalation,
/// training) failed to produce a usable result.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A file could not be read, is truncated, or does not parse.
class IoError : public Error {
public:
    using Error::Error;
};

class CorruptFileError : public IoError {
public:
    using IoError::IoError;
};

class VersionMismatchError : public IoError {
public:
    using IoError::IoError;
};

/// Simulation state left the admissible envelope (non-finite or runaway).
class SimulationError : public Error {
public:
    using Error::Error;
};

} // namespace terra
