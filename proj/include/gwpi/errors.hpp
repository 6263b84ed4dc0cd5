#pragma once

#include <stdexcept>
#include <string>

namespace gwpi {

/// Argument outside the mathematical domain of an operation (s >= 1, y = 0, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Model parameters that do not define a valid critical offspring/immigration pair.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation requires a family capability the model does not have
/// (series expansion or closed forms for a non-constant SV function).
class FamilyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Iteration or quadrature failed to meet its tolerance before its cap.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-bounds configuration. Carries the offending line when known.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace gwpi
