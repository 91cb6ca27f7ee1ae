#pragma once

#include <stdexcept>
#include <string>

namespace cyclebal {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad configuration: unknown keys, unparsable values, invalid combinations.
/// Mapped to exit code 1 by the CLI.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (manifests, images).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Corrupt, truncated, or version-mismatched checkpoint files.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Training aborted (non-finite loss, empty class, shape mismatch).
class TrainError : public Error {
 public:
  using Error::Error;
};

/// Invalid metric input (single-class ROC, mismatched lengths).
class EvalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cyclebal
