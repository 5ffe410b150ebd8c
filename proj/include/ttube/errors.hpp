/**
 * @file errors.hpp
 * @brief Exception types raised by the solver and its substrates.
 */
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ttube {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

struct DimensionMismatch : Error {
  using Error::Error;
};

struct DivisionByZeroInterval : Error {
  DivisionByZeroInterval() : Error("interval division: divisor contains zero") {}
};

struct DomainError : Error {
  using Error::Error;
};

struct NonSquare : Error {
  NonSquare() : Error("matrix is not square") {}
};

struct SyntaxError : Error {
  SyntaxError(std::size_t pos, const std::string& what)
      : Error("syntax error at position " + std::to_string(pos) + ": " + what), position(pos) {}
  std::size_t position;
};

struct UnknownIdentifier : Error {
  UnknownIdentifier(std::size_t pos, const std::string& name)
      : Error("unknown identifier '" + name + "' at position " + std::to_string(pos)),
        position(pos),
        identifier(name) {}
  std::size_t position;
  std::string identifier;
};

struct NonIntegerExponent : Error {
  explicit NonIntegerExponent(std::size_t pos)
      : Error("exponent must be a nonnegative integer literal (position " + std::to_string(pos) + ")"),
        position(pos) {}
  std::size_t position;
};

struct ProblemFormatError : Error {
  ProblemFormatError(std::size_t line, const std::string& what)
      : Error("problem file line " + std::to_string(line) + ": " + what), line_number(line) {}
  std::size_t line_number;
};

struct NodeRangeExceeded : Error {
  using Error::Error;
};

/// A step could not be validated even after shrinking the step to the floor.
struct StepFailure : Error {
  StepFailure(const std::string& what, double time) : Error(what), at_time(time) {}
  double at_time;
};

struct ResourceLimit : Error {
  using Error::Error;
};

/// Two enclosures of the same nonempty set failed to intersect. Indicates a bug.
struct InternalSoundnessViolation : Error {
  using Error::Error;
};

}  // namespace ttube
