#pragma once

#include <stdexcept>
#include <string>

namespace cskit {

// Base class for all toolkit errors. Subclasses map to CLI exit codes:
// usage/config -> 2, file format -> 3, numerical failure -> 4.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Mismatched operand shapes (matrix/vector dimensions, mask lengths).
class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(what) {}
};

// Invalid parameter values (Sr outside (0,1], K out of range, bad thresholds).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Divergence, non-finite values, or failed factorizations.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what) {}
};

// Unreadable or malformed input files; messages carry line/offset context.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

}  // namespace cskit
