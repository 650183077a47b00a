#pragma once

#include <stdexcept>
#include <string>

namespace sparselwe {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent parameters (h > n, empty sets, unknown presets...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix shapes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A linear solve failed even after ridge jitter.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// File or stream failures, including malformed input files.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparselwe
