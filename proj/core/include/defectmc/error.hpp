#pragma once

#include <stdexcept>
#include <string>

namespace defectmc {

/// Invalid user input: bad configuration values, malformed files,
/// violated preconditions on public operations.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Failure inside a numerical kernel (indefinite overlap matrix,
/// eigensolver non-convergence, empty system).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace defectmc
