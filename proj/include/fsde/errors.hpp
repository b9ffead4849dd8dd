#pragma once

#include <stdexcept>
#include <string>

namespace fsde {

// Invalid parameters or a violated model assumption. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Path generation or simulation produced something unusable. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system failures. Exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation was called in a way its contract forbids (e.g. phi_tilde
// without the drift statistic).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace fsde
