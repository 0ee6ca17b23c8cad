#pragma once

#include <stdexcept>
#include <string>

namespace boltrot {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter violates an operation's precondition (bad sigma, even window, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Input data cannot support the requested estimate (too few or coincident points).
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Robust estimation found no model with enough support.
class EstimationFailure : public Error {
 public:
  using Error::Error;
};

/// Malformed configuration, manifest or label file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read or written.
class IoError : public Error {
 public:
  IoError(const std::string& what, std::string path) : Error(what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace boltrot
