#pragma once

#include <stdexcept>
#include <string>

namespace flexcast {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (CSV rows, timestamps, config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Inconsistent request: mismatched grids, missing signals, bad sweep cells.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Timestamp or step index outside the optimization horizon.
class HorizonError : public Error {
 public:
  using Error::Error;
};

// Conditions that are impossible for valid inputs (e.g. an infeasible
// scheduling problem after ingestion filtering) or numerical failures.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace flexcast
