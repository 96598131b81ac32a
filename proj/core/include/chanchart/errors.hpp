#pragma once

#include <stdexcept>
#include <string>

namespace chanchart {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user-supplied parameter (config file, CLI flag, out-of-range knob).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Data violates a documented invariant (mismatched dims, non-monotone timestamps).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// On-disk payload is not a valid CCD1/CCM1 file (bad magic, truncation).
class FormatError : public Error {
public:
    using Error::Error;
};

/// Tensor/vector dimension mismatch between producer and consumer.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Mathematically degenerate input (zero matrix, coincident point clouds).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Non-finite value produced at runtime (diverged training, overflow).
class NumericError : public Error {
public:
    using Error::Error;
};

/// API contract broken by the caller (stale cache, mismatched batch kind).
class ContractError : public Error {
public:
    using Error::Error;
};

/// Filesystem-level failure.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace chanchart
