#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace canopy {

// Base for every runtime failure raised by the library. Precondition
// violations on arguments use std::invalid_argument / std::out_of_range.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file; carries the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

// Input data does not cover a requested instant or day.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// Every voxel was removed by the minimum-weight filter.
class EmptyGridError : public Error {
 public:
  using Error::Error;
};

class CalibrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace canopy
