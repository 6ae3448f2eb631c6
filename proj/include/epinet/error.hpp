#pragma once

#include <stdexcept>

namespace epinet {

// Bad input: parameters, config files, infeasible degree sequences. CLI exit code 1.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A computation left its valid domain (invariant drift, non-convergence). CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace epinet
