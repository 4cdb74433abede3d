#pragma once

#include <stdexcept>
#include <string>

namespace xmotion {

// Operand shapes do not fit the operation.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// A stated precondition was violated.
struct ContractError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Too few observed frames to build the requested windows.
struct InsufficientHistoryError : ContractError {
  using ContractError::ContractError;
};

// Geometric configuration admits no unique answer
// (collinear anchors, coincident points, parallel rays).
struct DegeneracyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// NaN/Inf appeared in a forward result, or optimization diverged.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed input file; `line` is 1-based, 0 when not tied to a line.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, int line_no = 0)
      : std::runtime_error(line_no > 0 ? msg + " (line " + std::to_string(line_no) + ")" : msg),
        line(line_no) {}
  int line = 0;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace xmotion
