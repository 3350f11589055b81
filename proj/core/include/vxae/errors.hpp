#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vxae {

// Operand shapes are inconsistent with an op's contract.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A binary or text container does not follow its format (binvox, checkpoint, model description).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// STL parse failure. Carries the byte offset (binary) or line number (ASCII) of the problem.
class ParseError : public FormatError {
 public:
  ParseError(const std::string& what, std::uint64_t location, bool is_line)
      : FormatError(what + (is_line ? " (line " : " (byte offset ") + std::to_string(location) + ")"),
        location_(location),
        is_line_(is_line) {}

  std::uint64_t location() const noexcept { return location_; }
  bool is_line() const noexcept { return is_line_; }

 private:
  std::uint64_t location_;
  bool is_line_;
};

// Dataset or file-system level problem (missing directory, empty dataset, unreadable file).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Training produced a non-finite value.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vxae
