#include "conelab/errors.hpp"

namespace conelab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::DerivativeFailure: return "DerivativeFailure";
    case ErrorCode::InvalidCase: return "InvalidCase";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::CaseMismatch: return "CaseMismatch";
    case ErrorCode::NotNormalised: return "NotNormalised";
    case ErrorCode::GradientVanishes: return "GradientVanishes";
    case ErrorCode::FlowLeftDomain: return "FlowLeftDomain";
    case ErrorCode::UnsupportedWarp: return "UnsupportedWarp";
    case ErrorCode::DomainContainsWarpZero: return "DomainContainsWarpZero";
    case ErrorCode::InconclusiveSample: return "InconclusiveSample";
    case ErrorCode::F1HasZero: return "F1HasZero";
    case ErrorCode::ODESolveFailure: return "ODESolveFailure";
    case ErrorCode::PairNotAdmissible: return "PairNotAdmissible";
    case ErrorCode::NonRealCurrent: return "NonRealCurrent";
    case ErrorCode::FormNotPositive: return "FormNotPositive";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::AsymmetricMetric: return "AsymmetricMetric";
  }
  return "Unknown";
}

}  // namespace conelab
