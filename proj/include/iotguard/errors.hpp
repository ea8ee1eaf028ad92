#pragma once

#include <stdexcept>

namespace iotguard {

// Exit-code contract shared by the library and the CLI:
// 0 success, 2 parameter error, 3 data error, 4 internal error.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 4; }
};

/// Caller passed an invalid argument or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

/// Input data is missing, malformed, or violates a documented precondition.
class DataError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

/// A pipeline invariant broke; indicates a bug upstream of the failing call.
class InternalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace iotguard
