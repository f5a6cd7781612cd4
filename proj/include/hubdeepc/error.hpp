#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hubdeepc {

/// Error classes raised across the toolkit. The CLI maps each class to a
/// distinct nonzero exit code.
enum class ErrorKind {
  WindowTooLong = 1,
  DimensionMismatch,
  StateBlowUp,
  CurrentLimit,
  NegativeInput,
  ZeroRegister,
  NotExciting,
  MissingPredictions,
  ScenarioMismatch,
  SolverFailure,
  InvalidConfig,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::WindowTooLong: return "WindowTooLong";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::StateBlowUp: return "StateBlowUp";
    case ErrorKind::CurrentLimit: return "CurrentLimit";
    case ErrorKind::NegativeInput: return "NegativeInput";
    case ErrorKind::ZeroRegister: return "ZeroRegister";
    case ErrorKind::NotExciting: return "NotExciting";
    case ErrorKind::MissingPredictions: return "MissingPredictions";
    case ErrorKind::ScenarioMismatch: return "ScenarioMismatch";
    case ErrorKind::SolverFailure: return "SolverFailure";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline void require(bool condition, ErrorKind kind, const std::string& what) {
  if (!condition) throw Error(kind, what);
}

}  // namespace hubdeepc
