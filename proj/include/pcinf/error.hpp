#pragma once

#include <stdexcept>

namespace pcinf {

// Raised when the input data cannot support the requested computation
// (parse failures, degenerate variance, too few observations, ...).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised for malformed command-line arguments or configuration.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace pcinf
