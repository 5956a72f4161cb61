#pragma once

#include <stdexcept>
#include <string>

namespace etmpc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or vector sizes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A parameter outside its admissible range (e.g. 0 < mu < 1 violated).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Scenario/config parse or validation failure. Carries the offending line
/// (1-based, 0 when unknown) and field name so the CLI can point at it.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0, std::string field = {})
      : Error(Format(message, line, field)), line_(line), field_(std::move(field)) {}

  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string Format(const std::string& message, int line,
                            const std::string& field) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "'" + field + "': ";
    return out + message;
  }

  int line_;
  std::string field_;
};

/// The SDP at a trigger instant could not be solved to certified optimality.
class SolverError : public Error {
 public:
  SolverError(const std::string& message, int step)
      : Error("step " + std::to_string(step) + ": " + message), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

}  // namespace etmpc
