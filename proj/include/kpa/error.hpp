#pragma once

#include <stdexcept>
#include <string>

namespace kpa {

/// Base class for every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input files. Message carries source and row.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Numerical failure (zero vector, non-finite loss, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace kpa
