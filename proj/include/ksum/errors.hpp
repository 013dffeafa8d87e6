#pragma once

#include <stdexcept>
#include <string>

namespace ksum {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input file; message names the offending row/column.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Not enough observations for the requested computation.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// An agency assigned the same raw score to every asset, so min-max
/// scaling is undefined for that row.
class DegenerateRowError : public Error {
 public:
  using Error::Error;
};

/// Vector/matrix dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Bad configuration (missing files, out-of-range parameters, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ksum
