#pragma once

#include <stdexcept>
#include <string>

namespace usplit {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (shape mismatch, negative entries, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A dense or structured inverse was requested for a (numerically) singular operator.
class SingularOperator : public Error {
 public:
  using Error::Error;
};

/// An operation needs a capability the operator does not provide (e.g. an adjoint).
class MissingCapability : public Error {
 public:
  using Error::Error;
};

/// Malformed problem or suite configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A file could not be read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace usplit
