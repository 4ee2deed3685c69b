#pragma once

#include <stdexcept>
#include <string>

namespace lift {

// Error taxonomy shared across modules. Each maps to one failure class the
// public contracts name (shape mismatch, bad config value, corrupt file, ...).
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ValueError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IndexError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Checkpoint/config container has the wrong magic or version.
struct FormatError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Checkpoint bytes fail their digest or are truncated.
struct CorruptionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Training aborted because numeric state went bad (NaN grads, diverging loss).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A parameter group that was declared frozen changed during a stage.
struct FreezingViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace lift
