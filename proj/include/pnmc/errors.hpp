#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pnmc {

/// Failure categories raised by the library. The CLI maps each one to an exit code.
enum class ErrorKind {
  InvalidArgument,
  GridTooSmall,
  NearZeroField,
  OutOfDomain,
  BothMuZero,
  BlowUp,
  NoConvergence,
  SingularDegreeSystem,
  ResidualTooLarge,
  StepUnstable,
  DegenerateMetric,
  NotIsotropic,
  MinimalOrTotallyGeodesic,
  NotSeparable,
  ConfigError,
  IoError,
};

constexpr std::string_view error_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::NearZeroField: return "NearZeroField";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::BothMuZero: return "BothMuZero";
    case ErrorKind::BlowUp: return "BlowUp";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularDegreeSystem: return "SingularDegreeSystem";
    case ErrorKind::ResidualTooLarge: return "ResidualTooLarge";
    case ErrorKind::StepUnstable: return "StepUnstable";
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::NotIsotropic: return "NotIsotropic";
    case ErrorKind::MinimalOrTotallyGeodesic: return "MinimalOrTotallyGeodesic";
    case ErrorKind::NotSeparable: return "NotSeparable";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what, std::string module = {})
      : std::runtime_error(std::string(error_name(kind)) + ": " + what),
        kind_(kind),
        module_(std::move(module)) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view name() const noexcept { return error_name(kind_); }
  const std::string& module() const noexcept { return module_; }

  /// Measured quantity attached to tolerance failures (ResidualTooLarge etc.).
  double value = 0.0;

 private:
  ErrorKind kind_;
  std::string module_;
};

}  // namespace pnmc
