#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gwcls {

enum class ErrorCode {
  InvalidLaw,
  InvalidArgument,
  NotDoublySymmetric,
  NotCritical,
  NotPositivelyRegular,
  ZeroImmigrationMean,
  Overflow,
  DenominatorZero,
  SingularNormalMatrix,
  DegenerateDenominator,
  WrongRegime,
  DivisionByZero,
  EnumerationTooLarge,
  EmptySample,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidLaw: return "InvalidLaw";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotDoublySymmetric: return "NotDoublySymmetric";
    case ErrorCode::NotCritical: return "NotCritical";
    case ErrorCode::NotPositivelyRegular: return "NotPositivelyRegular";
    case ErrorCode::ZeroImmigrationMean: return "ZeroImmigrationMean";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::DenominatorZero: return "DenominatorZero";
    case ErrorCode::SingularNormalMatrix: return "SingularNormalMatrix";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::WrongRegime: return "WrongRegime";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Single exception type for the library; `code()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gwcls
