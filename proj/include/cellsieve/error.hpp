#pragma once

#include <stdexcept>
#include <string>

namespace cellsieve {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data, inconsistent dimensions or invalid configuration.
class InputError : public Error {
 public:
  using Error::Error;
};

// An iterative solver hit its iteration cap.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace cellsieve
