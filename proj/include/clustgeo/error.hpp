#pragma once

#include <stdexcept>
#include <string>

namespace clustgeo {

// Malformed or contradictory input: bad files, bad arguments, violated preconditions.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs that are individually valid but do not agree with each other
// (e.g. ids in a label file that a map does not contain).
class ConsistencyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Something that should be impossible for valid input, e.g. a non-finite
// aggregation value appearing mid-run.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace clustgeo
