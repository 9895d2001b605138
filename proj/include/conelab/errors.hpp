#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace conelab {

enum class ErrorCode {
  OutOfDomain,
  DegenerateMetric,
  DerivativeFailure,
  InvalidCase,
  InvalidArgument,
  CaseMismatch,
  NotNormalised,
  GradientVanishes,
  FlowLeftDomain,
  UnsupportedWarp,
  DomainContainsWarpZero,
  InconclusiveSample,
  F1HasZero,
  ODESolveFailure,
  PairNotAdmissible,
  NonRealCurrent,
  FormNotPositive,
  DimensionTooLarge,
  ParseError,
  UnknownIdentifier,
  AsymmetricMetric,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace conelab
