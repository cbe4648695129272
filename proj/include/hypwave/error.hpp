#pragma once

#include <stdexcept>
#include <string>

namespace hypwave {

/// Bad input shape or arguments (CLI exit code 1).
class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Data that parses but violates an invariant (CLI exit code 2).
class ValidationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Solver breakdown, CFL refusal, non-convergence (CLI exit code 3).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace hypwave
