#pragma once

#include <stdexcept>

namespace graftforest {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed call arguments: dimension mismatch, index out of range, illegal split.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent growth, resampling or experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Dataset ingestion failures. Messages carry row/column context.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for this kind of model (e.g. weights of regressor leaves).
class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

/// An internal invariant did not hold. Indicates a bug, never bad input.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace graftforest
