#pragma once

#include <stdexcept>
#include <string>

namespace risktube {

// Root of the library's exception hierarchy. The CLI maps each subtype to an
// exit code (validation 2, split overlap 3, I/O 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Raised when a quantile is requested from an empty score list.
class UncalibratableError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Raised when the alignment loss has no same-category triplet to average over.
class NoValidTripletsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SplitOverlapError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace risktube
