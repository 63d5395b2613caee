#pragma once

#include <stdexcept>
#include <string>

namespace backheat {

// Invalid user-facing parameters (grid sizes, times, tolerances).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Vectors or fields that do not belong to the same discretization.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Singular step matrices, non-finite values, eigensolver failures.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace backheat
