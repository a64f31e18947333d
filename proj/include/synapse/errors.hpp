#pragma once

#include <stdexcept>
#include <string>

namespace synapse {

/// A precondition on an argument was violated.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file could not be read or does not match its schema. The message names
/// the file and the offending field.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SGD produced a non-finite loss.
class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace synapse
