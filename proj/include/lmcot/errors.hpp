#pragma once

#include <stdexcept>
#include <string>

namespace lmcot {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-contract input (non-finite values, bad shapes, empty sets).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A vector whose norm is below the numerical floor cannot be normalized.
class ZeroVectorError : public InputError {
 public:
  using InputError::InputError;
};

/// cot evaluated at (or within eps of) a multiple of pi.
class SingularityError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lmcot
