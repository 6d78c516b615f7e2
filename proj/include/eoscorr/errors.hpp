#pragma once

#include <stdexcept>
#include <string>

namespace eoscorr {

// Config-file problems (unknown key, bad value, ...). CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failures (integrator blow-up, NaN, degenerate estimators). CLI exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Raised by the estimators when the corrected variances are not usable.
class InsufficientSignal : public NumericalError {
 public:
  explicit InsufficientSignal(const std::string& msg) : NumericalError(msg) {}
};

// File-format / filesystem problems. CLI exit code 4.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace eoscorr
