#include "hyzeno/error.hpp"

#include <fmt/format.h>

namespace hyzeno {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorCode::UnknownLevel: return "UnknownLevel";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownIdentifier: return "UnknownIdentifier";
    case ErrorCode::ArityMismatch: return "ArityMismatch";
    case ErrorCode::TypeMismatch: return "TypeMismatch";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::UnknownScenario: return "UnknownScenario";
    case ErrorCode::ParamOutOfRange: return "ParamOutOfRange";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IntegrationError: return "IntegrationError";
    case ErrorCode::NotInJumpSet: return "NotInJumpSet";
    case ErrorCode::InvalidInitialCondition: return "InvalidInitialCondition";
    case ErrorCode::NotZeno: return "NotZeno";
    case ErrorCode::NonConvergentTail: return "NonConvergentTail";
    case ErrorCode::EmptyOmega: return "EmptyOmega";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotInputFree: return "NotInputFree";
    case ErrorCode::NegativeDistance: return "NegativeDistance";
    case ErrorCode::GradientUnavailable: return "GradientUnavailable";
    case ErrorCode::ChainNotNested: return "ChainNotNested";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(fmt::format("{}: {}", to_string(code), message)), code_(code), detail_(message) {}

ParseError::ParseError(ErrorCode code, std::size_t position, const std::string& message)
    : Error(code, fmt::format("at position {}: {}", position, message)), position_(position), reason_(message) {}

}  // namespace hyzeno
