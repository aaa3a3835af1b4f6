#pragma once

#include <stdexcept>
#include <string>

namespace apa {

/// Base of every error the library throws. The category decides how the
/// CLI maps the failure onto an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or arguments (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable, malformed or insufficient input data (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A mathematically undefined or failed computation (CLI exit code 4).
class MathDomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace apa
