#pragma once

#include <stdexcept>
#include <string>

namespace vibespeech {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV row, JSON line, WAV header).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A value violates a type invariant or an operation precondition.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Filesystem failure; the message carries the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration (flags, config file, model parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Data is structurally valid but unusable (empty dataset, too few rows per class).
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace vibespeech
