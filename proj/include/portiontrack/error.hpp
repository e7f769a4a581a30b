#pragma once

#include <stdexcept>
#include <string>

namespace ptrack {

// Exception families map one-to-one onto CLI exit codes:
// IoError -> 1, ValidationError -> 2, DataError -> 3.

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated container file.
class FormatError : public IoError {
public:
  using IoError::IoError;
};

class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Inputs are individually valid but inconsistent with each other
/// (dims or channel count differ across frames, unknown labels, ...).
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace ptrack
