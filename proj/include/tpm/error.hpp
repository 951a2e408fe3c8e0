#pragma once

#include <stdexcept>
#include <string>

namespace tpm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain input (bad index, probability outside [0, 1], ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Exact enumeration would exceed the configured work limit.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Bracketing, root finding or quadrature did not converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A report stream violates the market protocol (e.g. an agent reports twice).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// Evidence contradicts the current belief (zero posterior mass everywhere).
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace tpm
