#pragma once

#include <stdexcept>
#include <string>

namespace pmsm {

/// Bad configuration file, CLI usage, or schema mismatch. CLI exit code 1.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Operation left the model validity region (indefinite admittance etc.).
/// CLI exit code 2.
class ValidityError : public std::runtime_error {
  public:
    explicit ValidityError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Iterative solve did not converge. CLI exit code 2.
class ConvergenceError : public std::runtime_error {
  public:
    explicit ConvergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pmsm
