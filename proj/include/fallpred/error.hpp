#pragma once

#include <stdexcept>
#include <string>

namespace fallpred {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing or malformed configuration value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad or inconsistent input data (trajectories, windows, splits, files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Network shape mismatches, non-finite parameters, unreadable model files.
class ModelError : public Error {
 public:
  using Error::Error;
};

class SimulationDiverged : public Error {
 public:
  using Error::Error;
};

class CalibrationFailed : public Error {
 public:
  using Error::Error;
};

}  // namespace fallpred
