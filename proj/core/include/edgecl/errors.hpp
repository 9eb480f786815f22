#pragma once

#include <stdexcept>
#include <string>

namespace edgecl {

// Base of every error raised by the library. The CLI maps ConfigError (and
// its subclasses) to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

// Operation needs state that was never recorded (e.g. a missing layer tape).
class StateError : public Error {
 public:
  using Error::Error;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// A layer whose smallest tile does not fit the L1 scratchpad.
class InfeasibleError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Malformed on-disk data (replay store, descriptor, profile, CSV).
class FormatError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace edgecl
