#pragma once

#include <stdexcept>
#include <string>

namespace accsim {

// Malformed input file content (bad rows, bad JSON). Carries context such as
// the offending line number in the message.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structurally valid file with inadmissible content (non-uniform time grid,
// missing required column).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Physically inadmissible data (negative speed sample, non-positive spacing).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent configuration (missing parameter for a model, bad bounds,
// non-positive time constant).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation on an object in an unusable state (query on an empty buffer).
class StateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values produced during simulation; message names the step.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that makes the requested statistic meaningless (zero observed RMS,
// zero minimum in error normalization).
class DegenerateInputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Calibration finished without a feasible collision-free solution.
class CalibrationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace accsim
